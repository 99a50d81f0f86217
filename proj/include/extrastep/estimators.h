// Copyright 2026 The Extrastep Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EXTRASTEP_ESTIMATORS_H_
#define EXTRASTEP_ESTIMATORS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "extrastep/problems.h"
#include "extrastep/prox.h"
#include "extrastep/quantizer.h"
#include "extrastep/rng.h"

namespace extrastep {

// Strategies for the operator pair (g^k, g^{k+1/2}) of the extra-step loop.
enum class EstimatorVariant {
  kFullDet,  // exact F at both points
  kNoisy,    // F plus zero-mean noise at both points
  kPast,     // single call: reuses the previous half-step value
  kVR,       // loopless variance reduction over the finite sum
  kCoord,    // one random coordinate of the correction
  kQuant,    // quantized correction F(z) - F(w)
  kQVR,      // quantized variance-reduced correction
  kIS,       // importance-sampled variance reduction
  kLocal,    // randomized local / communication split for mixing problems
};

std::string VariantName(EstimatorVariant variant);
std::optional<EstimatorVariant> ParseVariant(const std::string& name);

struct EstimatorKind {
  EstimatorVariant variant = EstimatorVariant::kFullDet;
  // Noisy, Past: E||noise||^2 = noise_sigma^2, spread evenly over coordinates.
  double noise_sigma = 0.0;
  // Quant, QVR.
  std::optional<Quantizer> quantizer;
  // IS: sampling probabilities; empty selects p_m proportional to L_m.
  std::vector<double> weights;
  // Local: probability of the Phi (local) branch.
  double split = 0.5;
  // Coord: the correction is scaled by coord_scale * d. Values other than 1
  // give a biased estimator, used as a negative control by the verifier.
  double coord_scale = 1.0;

  static EstimatorKind FullDet();
  static EstimatorKind Noisy(double sigma);
  static EstimatorKind Past(double sigma);
  static EstimatorKind VR();
  static EstimatorKind Coord();
  static EstimatorKind Quant(Quantizer q);
  static EstimatorKind QVR(Quantizer q);
  static EstimatorKind IS(std::vector<double> weights = {});
  static EstimatorKind Local(double split);

  // Whether the estimator keeps a snapshot point w with cached F(w).
  bool uses_snapshot() const;
  std::string name() const;
};

// Oracle and communication budget consumed so far. All counters are
// nondecreasing.
struct CostLedger {
  std::uint64_t full_oracle_calls = 0;
  std::uint64_t component_oracle_calls = 0;
  std::uint64_t coordinates_touched = 0;
  std::uint64_t bits_sent = 0;
  std::uint64_t communications = 0;
  std::uint64_t local_steps = 0;

  friend bool operator==(const CostLedger&, const CostLedger&) = default;
};

// Constants (A, B, C, E, D1, D2, D3, rho) of the estimator inequalities
//   E||g^{k+1/2} - g^k||^2 <= A E||z^{k+1/2} - w^k||^2 + B E[s_k^2] + D1,
//   E[s_{k+1}^2] <= (1 - rho) E[s_k^2] + C E||z^{k+1/2} - w^k||^2 + D2,
//   E||g^{k+1/2} - F(z^{k+1/2})||^2 <= E E||z^{k+1/2} - w^k||^2 + D3.
struct AssumptionConstants {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double e = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  double rho = 1.0;
  double tau_star = 0.0;
  // L the table was computed with; used by step-size rules stated in L.
  double lipschitz = 0.0;
};

// Inputs to the constants table. Fields a variant does not need may stay
// unset; a needed field that is unset raises ParameterError.
struct ConstantInputs {
  std::optional<double> lipschitz;  // L
  double bounded_d = 0.0;           // D
  std::optional<Index> dimension;   // d (Coord)
  std::optional<Index> components;  // M
  // IS: constants of the summands f_m with F = sum_m f_m.
  std::vector<double> summand_lipschitz;
  std::vector<double> summand_d;
  std::vector<double> weights;
  // Local: Lipschitz constant of Phi and the mixing weight.
  std::optional<double> local_lipschitz;
  std::optional<double> lambda;
};

AssumptionConstants ComputeAssumptionConstants(const EstimatorKind& kind,
                                               const ConstantInputs& in);

// Inputs derived from a problem's constants. VR and QVR use
// max(L, max_m L_m) since their bound needs every component to be
// L-Lipschitz; IS uses the summand constants L_m / M of F = sum_m F_m / M.
ConstantInputs ConstantInputsFor(const EstimatorKind& kind,
                                 const VIProblem& problem);

// Balance point between per-iteration cost and snapshot refresh cost.
double OptimalTau(const EstimatorKind& kind, Index components, Index dimension,
                  double omega, double lipschitz, double lambda);
double OptimalTau(const EstimatorKind& kind, const VIProblem& problem);

// p_m = L_m / sum_j L_j. Throws ParameterError if any L_m <= 0.
std::vector<double> ImportanceWeights(const std::vector<double>& lipschitz);

struct EstimatePair {
  Vector g_lead;  // g^k
  Vector g_half;  // g^{k+1/2}
  Vector z_half;  // z^{k+1/2}
};

struct WeightedSample {
  double probability;
  Vector value;
};

// Mutable per-run estimator state: snapshot w, cached operator values at w,
// the previous half-step value for Past, and the cost ledger. Holds a
// reference to the problem, which must outlive it.
class Estimator {
 public:
  Estimator(EstimatorKind kind, const VIProblem& problem);

  const EstimatorKind& kind() const { return kind_; }
  const VIProblem& problem() const { return *problem_; }
  // Resolved IS probabilities (empty for other variants).
  const std::vector<double>& weights() const { return weights_; }

  // Sets w = z^0 and fills the caches; Past also stores F(z^0, xi) as the
  // value of the virtual point z^{-1/2} := z^0.
  void Initialize(const Vector& z0, RngStream& rng);
  bool initialized() const { return initialized_; }

  // g^k for the current iterate.
  Vector Lead(const Vector& z_k, RngStream& rng);
  // g^{k+1/2}; Past also records the value for the next iteration.
  Vector Correct(const Vector& z_half, RngStream& rng);
  // z^{k+1/2} = prox(z_bar - gamma g^k) together with both estimates.
  EstimatePair Pair(const Vector& z_bar, const Vector& z_k, double gamma,
                    RngStream& rng);

  // With probability 1 - tau (one uniform draw from `coin`) moves the
  // snapshot to z_next and refreshes the caches. Returns whether it moved.
  bool UpdateSnapshot(const Vector& z_next, double tau, RngStream& coin);

  // Side-effect-free draws for verification; costs go to `ledger`. For Past
  // the lead is a fresh noisy value at the stored previous half step.
  Vector SampleLead(const Vector& z_k, RngStream& rng, CostLedger& ledger) const;
  Vector SampleHalf(const Vector& z_half, RngStream& rng,
                    CostLedger& ledger) const;
  // Every outcome of g^{k+1/2} with its probability, for finite-support
  // variants; nullopt for continuous or oversized supports.
  std::optional<std::vector<WeightedSample>> EnumerateHalf(
      const Vector& z_half) const;

  const Vector& snapshot() const { return w_; }
  // Cached F(w) (snapshot variants only).
  const Vector& snapshot_value() const { return fw_; }
  // Past: ||F(z^{k-1/2}) - F(z^{k+1/2})||^2 from the latest correction.
  double sigma_sq() const { return sigma_sq_; }
  const CostLedger& costs() const { return costs_; }
  // Number of times UpdateSnapshot moved w.
  std::uint64_t snapshot_moves() const { return snapshot_moves_; }

 private:
  void RequireInitialized() const;
  void RefreshCache();
  Vector Noise(RngStream& rng) const;
  Index SampleComponent(RngStream& rng) const;

  const VIProblem* problem_;
  EstimatorKind kind_;
  std::vector<double> weights_;
  bool initialized_ = false;
  Vector w_;
  Vector fw_;
  std::vector<Vector> fw_components_;
  Vector phi_w_;
  Vector consensus_w_;
  Vector past_clean_;
  Vector past_noisy_;
  double sigma_sq_ = 0.0;
  CostLedger costs_;
  std::uint64_t snapshot_moves_ = 0;
};

}  // namespace extrastep

#endif  // EXTRASTEP_ESTIMATORS_H_
