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

#include "extrastep/solver.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <utility>

#include "extrastep/errors.h"
#include "extrastep/metrics.h"

namespace extrastep {
namespace {

constexpr std::int64_t kMaxDefaultRows = 10'000;

double SafeInverse(double x) {
  return x > 0.0 ? 1.0 / x : std::numeric_limits<double>::infinity();
}

bool SingleSequence(EstimatorVariant v) {
  return v == EstimatorVariant::kFullDet || v == EstimatorVariant::kNoisy ||
         v == EstimatorVariant::kPast;
}

// Gap of an iterate, if the problem supports one.
class GapMeter {
 public:
  GapMeter(const VIProblem& problem, const Vector& z0) : problem_(problem) {
    if (problem.game() != nullptr) return;
    if (const auto& zs = problem.known_solution()) {
      ball_ = std::make_unique<BallGap>(problem, *zs, 2.0 * (z0 - *zs).norm());
    }
  }

  std::optional<double> operator()(const Vector& z) const {
    if (const auto* g = problem_.game()) return DualityGapBilinear(*g, z).value;
    if (ball_) return (*ball_)(z);
    return std::nullopt;
  }

 private:
  const VIProblem& problem_;
  std::unique_ptr<BallGap> ball_;
};

}  // namespace

std::string RegimeName(Regime regime) {
  return regime == Regime::kStronglyMonotone ? "strongly_monotone" : "monotone";
}

std::optional<Regime> ParseRegime(const std::string& name) {
  if (name == "strongly_monotone") return Regime::kStronglyMonotone;
  if (name == "monotone") return Regime::kMonotone;
  return std::nullopt;
}

StepSize StepSizeBound(const EstimatorKind& kind, Regime regime,
                       const AssumptionConstants& constants, double mu_f,
                       double mu_h, double tau) {
  if (!(tau >= 0.0 && tau < 1.0)) throw ParameterError("tau must be in [0, 1)");
  const double mu = mu_f + mu_h;
  const bool strong = regime == Regime::kStronglyMonotone;
  if (strong && !(mu > 0.0)) {
    throw RegimeError("strongly monotone regime requires mu_f + mu_h > 0");
  }
  const double l = constants.lipschitz;
  StepSize out;
  switch (kind.variant) {
    case EstimatorVariant::kFullDet:
    case EstimatorVariant::kNoisy:
      out.gamma_max = strong ? std::min(SafeInverse(6.0 * l), SafeInverse(4.0 * mu))
                             : SafeInverse(3.0 * l);
      return out;
    case EstimatorVariant::kPast: {
      const double base = std::min(SafeInverse(12.0 * std::sqrt(2.0) * l),
                                   SafeInverse(3.0 * l));
      out.lyapunov_weight = strong ? 36.0 : 18.0;
      out.gamma_max = strong ? std::min(base, SafeInverse(4.0 * mu)) : base;
      return out;
    }
    default:
      break;
  }
  const double ratio = constants.rho > 0.0 ? constants.b / constants.rho : 0.0;
  const double root = std::sqrt(1.0 - tau);
  if (strong) {
    out.lyapunov_weight = std::max(4.0 * ratio, 0.0);
    const double denom =
        2.0 * std::sqrt(2.0 * constants.a + out.lyapunov_weight * constants.c);
    out.gamma_max = std::min(root * SafeInverse(denom), (1.0 - tau) / (4.0 * mu));
  } else {
    out.lyapunov_weight = std::max(2.0 * ratio, 0.0);
    const double denom =
        2.0 * std::sqrt(2.0 * constants.a + out.lyapunov_weight * constants.c +
                        constants.e);
    out.gamma_max = root * SafeInverse(denom);
  }
  return out;
}

void IterateOnce(IterateState& state, Estimator& estimator,
                 const SolverConfig& config, RngStream& draws, RngStream& coin) {
  const VIProblem& problem = estimator.problem();
  if (state.z.size() != problem.dimension()) {
    throw DimensionError("iterate: state has wrong length");
  }
  const double tau = config.tau;
  const double gamma = config.gamma;
  Vector z_bar = tau == 0.0 ? estimator.snapshot()
                            : Vector(tau * state.z + (1.0 - tau) * estimator.snapshot());
  EstimatePair pair = estimator.Pair(z_bar, state.z, gamma, draws);
  state.z = problem.prox().Apply(gamma, z_bar - gamma * pair.g_half);
  state.z_half = std::move(pair.z_half);
  ++state.k;
  estimator.UpdateSnapshot(state.z, tau, coin);
}

Vector InitialPoint(const VIProblem& problem, std::uint64_t seed) {
  const ProxSpec& prox = problem.prox();
  if (!prox.is_free()) return prox.Center();
  RngStream rng(seed, 2);
  Vector offset(problem.dimension());
  for (Index i = 0; i < offset.size(); ++i) offset(i) = rng.Normal();
  const double norm = offset.norm();
  if (norm > 0.0) offset /= norm;
  if (const auto& zs = problem.known_solution()) return *zs + offset;
  return offset;
}

std::int64_t DefaultStride(std::int64_t iterations) {
  if (iterations <= kMaxDefaultRows) return 1;
  return (iterations + kMaxDefaultRows - 1) / kMaxDefaultRows;
}

RunTrace RunSolver(const VIProblem& problem, const EstimatorKind& kind,
                   const SolverConfig& config) {
  if (!(config.gamma > 0.0)) throw ParameterError("gamma must be > 0");
  if (!(config.tau >= 0.0 && config.tau < 1.0)) {
    throw ParameterError("tau must be in [0, 1)");
  }
  if (config.iterations < 1) throw ParameterError("iterations must be >= 1");
  if (config.trace_stride < 0) throw ParameterError("trace stride must be >= 0");
  if (SingleSequence(kind.variant) && config.tau != 0.0) {
    throw ParameterError(kind.name() + " runs with tau = 0 only");
  }

  RngStream draws(config.seed, 0);
  RngStream coin(config.seed, 1);
  Estimator estimator(kind, problem);

  RunTrace trace;
  trace.z0 = InitialPoint(problem, config.seed);
  trace.stride =
      config.trace_stride > 0 ? config.trace_stride : DefaultStride(config.iterations);
  estimator.Initialize(trace.z0, draws);

  const auto& z_star = problem.known_solution();
  const GapMeter gap(problem, trace.z0);
  IterateState state{trace.z0, trace.z0, 0};
  Vector half_sum = Vector::Zero(problem.dimension());

  auto make_row = [&](bool have_average) {
    TraceRow row;
    row.k = state.k;
    row.costs = estimator.costs();
    if (z_star) {
      row.dist_sq = DistanceToSolution(state.z, *z_star);
      row.lyapunov = LyapunovValue(state.z, estimator.snapshot(), estimator.sigma_sq(),
                                   z_star, config.tau, config.gamma,
                                   config.lyapunov_weight);
    }
    row.gap_last = gap(state.z);
    if (have_average && row.gap_last) {
      row.gap_avg = gap(half_sum / static_cast<double>(state.k));
    }
    return row;
  };

  trace.initial = make_row(false);
  trace.rows.reserve(static_cast<std::size_t>(config.iterations / trace.stride + 1));
  for (std::int64_t k = 0; k < config.iterations; ++k) {
    IterateOnce(state, estimator, config, draws, coin);
    if (config.averaging) half_sum += state.z_half;
    if (state.k % trace.stride == 0 || state.k == config.iterations) {
      trace.rows.push_back(make_row(config.averaging));
    }
  }
  trace.final_iterate = state.z;
  if (config.averaging) {
    trace.averaged_iterate = half_sum / static_cast<double>(config.iterations);
  }
  trace.snapshot_moves = estimator.snapshot_moves();
  return trace;
}

double LyapunovValue(const Vector& z, const Vector& w, double sigma_sq,
                     const std::optional<Vector>& z_star, double tau,
                     double gamma, double lyapunov_weight) {
  if (!z_star) throw UnsupportedError("lyapunov: solution unknown");
  return tau * DistanceToSolution(z, *z_star) + DistanceToSolution(w, *z_star) +
         lyapunov_weight * gamma * gamma * sigma_sq;
}

Vector AveragedIterate(const std::vector<Vector>& half_steps) {
  if (half_steps.empty()) throw ParameterError("average: no iterates");
  Vector sum = Vector::Zero(half_steps.front().size());
  for (const Vector& z : half_steps) {
    if (z.size() != sum.size()) throw DimensionError("average: lengths differ");
    sum += z;
  }
  return sum / static_cast<double>(half_steps.size());
}

}  // namespace extrastep
