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

#ifndef EXTRASTEP_PROBLEMS_H_
#define EXTRASTEP_PROBLEMS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "Eigen/Core"
#include "extrastep/prox.h"

namespace extrastep {

// F(z) = matrix * z - offset.
struct AffineOperator {
  Eigen::MatrixXd matrix;
  Vector offset;

  Vector Apply(const Vector& z) const { return matrix * z - offset; }
};

// Finite-sum matrix game min_x max_y (1/n) sum_k y^T A^(k) x over a product
// of two simplices of size n^2. The operator of component k is
// F_k(x, y) = (A^(k)^T y, -A^(k) x).
struct BilinearGame {
  int side = 0;
  std::vector<Eigen::MatrixXd> matrices;
  Eigen::MatrixXd mean;

  Index block_size() const { return mean.rows(); }
};

// Federated mixing operator F(Z) = Phi(Z) + lambda (Z - Z_avg) over the
// stacked variable Z = (z_1, ..., z_M), where Phi(Z) = (F_1(z_1), ...,
// F_M(z_M)) and Z_avg repeats the worker average M times.
struct MixingVI {
  std::vector<AffineOperator> workers;
  Index worker_dimension = 0;
  double lambda = 0.0;

  Index worker_count() const { return static_cast<Index>(workers.size()); }
  Vector Average(const Vector& stacked) const;
  Vector LocalPart(const Vector& stacked) const;
  Vector ConsensusPart(const Vector& stacked) const;
};

// Constants of the monotonicity and bounded-Lipschitz assumptions.
struct ProblemConstants {
  double lipschitz = 0.0;  // L of the full operator
  double bounded_d = 0.0;  // D
  double mu_f = 0.0;
  double mu_h = 0.0;
  double noise_sigma = 0.0;
  std::vector<double> component_lipschitz;  // L_m
  std::vector<double> component_d;          // D_m
  // Mixing problems only: Lipschitz constant of Phi and the mixing weight.
  double local_lipschitz = 0.0;
  double lambda = 0.0;
};

class VIProblem {
 public:
  using Payload = std::variant<BilinearGame, AffineOperator, MixingVI>;

  VIProblem(Payload payload, ProxSpec prox, ProblemConstants constants,
            std::optional<Vector> known_solution);

  Index dimension() const { return prox_.dimension(); }
  // M of the finite-sum form F = (1/M) sum_m F_m.
  Index component_count() const;
  const ProxSpec& prox() const { return prox_; }
  const ProblemConstants& constants() const { return constants_; }
  ProblemConstants& mutable_constants() { return constants_; }
  const std::optional<Vector>& known_solution() const { return solution_; }
  const Payload& payload() const { return payload_; }

  const BilinearGame* game() const { return std::get_if<BilinearGame>(&payload_); }
  const MixingVI* mixing() const { return std::get_if<MixingVI>(&payload_); }
  const AffineOperator* affine() const {
    return std::get_if<AffineOperator>(&payload_);
  }

  Vector EvalFull(const Vector& z) const;
  // Zero-based component index m in [0, M).
  Vector EvalComponent(Index m, const Vector& z) const;
  // Single coordinate [F(z)]_i.
  double EvalCoordinate(Index i, const Vector& z) const;

  // Linear part J of the affine operator (F(z) = J z + F(0)) and J^T.
  Vector ApplyLinear(const Vector& v) const;
  Vector ApplyLinearTranspose(const Vector& v) const;
  Vector ApplyComponentLinear(Index m, const Vector& v) const;
  Vector ApplyComponentLinearTranspose(Index m, const Vector& v) const;
  // Dense J; intended for small problems.
  Eigen::MatrixXd DenseLinearPart() const;

 private:
  void CheckDimension(const Vector& z) const;
  void CheckComponent(Index m) const;

  Payload payload_;
  ProxSpec prox_;
  ProblemConstants constants_;
  std::optional<Vector> solution_;
};

// Pyramid-shaped base wealth of the n x n city, flattened row-major.
Vector WealthBase(int n);

// Euclidean distance between flattened cells i and j of the n x n grid.
double CellDistance(Index i, Index j, int n);

// Policeman-vs-burglar game with n components. Component k scales the base
// wealth by (1 + xi_k), xi_k ~ U[0, sigma_w], drawn once from `seed`.
VIProblem GeneratePoliceBurglar(int n, double theta, double sigma_w,
                                std::uint64_t seed);

// Strongly monotone affine problem F(z) = M (z - z*) with
// M = mu I + c (S + P), S skew, P symmetric PSD, c chosen so ||M||_2 = L.
VIProblem GenerateQuadratic(Index d, double mu, double lipschitz,
                            std::uint64_t seed);

// Stacks M free affine problems of equal dimension into a mixing problem.
VIProblem GenerateMixing(const std::vector<VIProblem>& base, double lambda);

// Spectral norm of the linear part via power iteration on J^T J, stopping
// when the relative change of the estimate falls below `tol`.
double EstimateLipschitz(const VIProblem& problem, double tol);
double EstimateComponentLipschitz(const VIProblem& problem, Index m,
                                  double tol);

enum class ProblemKind { kPoliceBurglar, kQuadratic, kMixing };

std::string ProblemKindName(ProblemKind kind);
std::optional<ProblemKind> ParseProblemKind(const std::string& name);

// Generator parameters; regeneration from these is deterministic.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::kPoliceBurglar;
  int side = 5;
  double theta = 0.6;
  double sigma_w = 3.0;
  Index dimension = 50;
  double mu = 0.1;
  double lipschitz = 10.0;
  Index workers = 4;
  double lambda = 1.0;
  std::uint64_t seed = 1;

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

VIProblem MakeProblem(const ProblemSpec& spec);

}  // namespace extrastep

#endif  // EXTRASTEP_PROBLEMS_H_
