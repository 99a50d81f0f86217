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

#ifndef EXTRASTEP_SOLVER_H_
#define EXTRASTEP_SOLVER_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "extrastep/estimators.h"
#include "extrastep/problems.h"
#include "extrastep/prox.h"
#include "extrastep/rng.h"

namespace extrastep {

enum class Regime { kStronglyMonotone, kMonotone };

std::string RegimeName(Regime regime);
std::optional<Regime> ParseRegime(const std::string& name);

struct SolverConfig {
  double gamma = 0.0;
  double tau = 0.0;
  std::int64_t iterations = 1;
  double lyapunov_weight = 0.0;  // T
  std::uint64_t seed = 1;
  Regime regime = Regime::kStronglyMonotone;
  // Track the running mean of the half-step iterates.
  bool averaging = true;
  // Row spacing of the trace; 0 selects 1 for K <= 10^4 and ceil(K / 10^4)
  // otherwise.
  std::int64_t trace_stride = 0;
};

struct StepSize {
  double gamma_max = 0.0;
  double lyapunov_weight = 0.0;  // T
};

// Largest admissible step size for `kind` in `regime`, together with the T
// the bound assumes. Throws RegimeError for the strongly monotone regime
// when mu_f + mu_h = 0.
StepSize StepSizeBound(const EstimatorKind& kind, Regime regime,
                       const AssumptionConstants& constants, double mu_f,
                       double mu_h, double tau);

// Iterate of the loop: z^k and the latest half step z^{k-1/2}.
struct IterateState {
  Vector z;
  Vector z_half;
  std::int64_t k = 0;
};

// One pass: z_bar = tau z + (1 - tau) w, the half step from the estimator,
// z^{k+1} = prox(z_bar - gamma g^{k+1/2}), then the snapshot coin.
// `draws` feeds the estimator, `coin` the snapshot update.
void IterateOnce(IterateState& state, Estimator& estimator,
                 const SolverConfig& config, RngStream& draws, RngStream& coin);

struct TraceRow {
  std::int64_t k = 0;
  CostLedger costs;
  std::optional<double> dist_sq;
  std::optional<double> lyapunov;
  std::optional<double> gap_last;
  std::optional<double> gap_avg;
};

struct RunTrace {
  TraceRow initial;  // k = 0, before any iteration
  std::vector<TraceRow> rows;
  Vector z0;
  Vector final_iterate;
  Vector averaged_iterate;  // empty unless averaging
  std::uint64_t snapshot_moves = 0;
  std::int64_t stride = 1;
};

// z^0: the center of every simplex block, or z* plus a unit-norm random
// offset drawn from (seed, stream 2) for free problems. Free problems
// without a known solution start at a unit-norm random point.
Vector InitialPoint(const VIProblem& problem, std::uint64_t seed);

std::int64_t DefaultStride(std::int64_t iterations);

// Runs K iterations from z^0 = w^0 and records rows at k = stride,
// 2 stride, ..., always including k = K. Estimator draws use stream 0 of
// config.seed, the snapshot coin stream 1.
RunTrace RunSolver(const VIProblem& problem, const EstimatorKind& kind,
                   const SolverConfig& config);

// tau |z - z*|^2 + |w - z*|^2 + T gamma^2 sigma_sq. Throws UnsupportedError
// when z* is absent.
double LyapunovValue(const Vector& z, const Vector& w, double sigma_sq,
                     const std::optional<Vector>& z_star, double tau,
                     double gamma, double lyapunov_weight);

// Arithmetic mean. Throws ParameterError on an empty list.
Vector AveragedIterate(const std::vector<Vector>& half_steps);

}  // namespace extrastep

#endif  // EXTRASTEP_SOLVER_H_
