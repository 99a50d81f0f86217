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

#include "extrastep/problems.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "Eigen/Eigenvalues"
#include "Eigen/LU"
#include "extrastep/errors.h"
#include "extrastep/rng.h"

namespace extrastep {
namespace {

// Relative tolerance used when generators fill in Lipschitz constants.
constexpr double kGeneratorLipschitzTol = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Vector GameOperator(const Eigen::MatrixXd& a, const Vector& z) {
  const Index n = a.rows();
  Vector out(2 * n);
  out.head(n).noalias() = a.transpose() * z.tail(n);
  out.tail(n).noalias() = -(a * z.head(n));
  return out;
}

// J^T for the skew block operator [[0, A^T], [-A, 0]] is its negation.
Vector GameOperatorTranspose(const Eigen::MatrixXd& a, const Vector& v) {
  return -GameOperator(a, v);
}

double SpectralNorm(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      m.transpose() * m, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

double PowerIterationNorm(const std::function<Vector(const Vector&)>& apply,
                          const std::function<Vector(const Vector&)>& apply_t,
                          Index dimension, double tol) {
  if (!(tol > 0.0)) throw ParameterError("power iteration: tol must be > 0");
  constexpr int kMaxIterations = 20000;
  RngStream rng(0x5eedu, 0);
  Vector v(dimension);
  for (Index i = 0; i < dimension; ++i) v(i) = rng.Normal();
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < kMaxIterations; ++it) {
    const Vector image = apply(v);
    const double next = image.norm();
    if (next == 0.0) return 0.0;
    Vector back = apply_t(image);
    const double back_norm = back.norm();
    if (back_norm == 0.0) return next;
    v = back / back_norm;
    if (it > 0 && std::abs(next - estimate) <= tol * next) return next;
    estimate = next;
  }
  return estimate;
}

}  // namespace

Vector MixingVI::Average(const Vector& stacked) const {
  const Index d = worker_dimension;
  Vector mean = Vector::Zero(d);
  for (Index m = 0; m < worker_count(); ++m) mean += stacked.segment(m * d, d);
  mean /= static_cast<double>(worker_count());
  return mean.replicate(worker_count(), 1);
}

Vector MixingVI::LocalPart(const Vector& stacked) const {
  const Index d = worker_dimension;
  Vector out(stacked.size());
  for (Index m = 0; m < worker_count(); ++m) {
    out.segment(m * d, d) = workers[m].Apply(stacked.segment(m * d, d));
  }
  return out;
}

Vector MixingVI::ConsensusPart(const Vector& stacked) const {
  return lambda * (stacked - Average(stacked));
}

VIProblem::VIProblem(Payload payload, ProxSpec prox,
                     ProblemConstants constants,
                     std::optional<Vector> known_solution)
    : payload_(std::move(payload)),
      prox_(std::move(prox)),
      constants_(std::move(constants)),
      solution_(std::move(known_solution)) {
  if (solution_ && solution_->size() != prox_.dimension()) {
    throw DimensionError("VIProblem: known solution has wrong length");
  }
}

Index VIProblem::component_count() const {
  if (const auto* g = game()) return static_cast<Index>(g->matrices.size());
  return 1;
}

void VIProblem::CheckDimension(const Vector& z) const {
  if (z.size() != dimension()) {
    throw DimensionError("operator: vector length " + std::to_string(z.size()) +
                         " does not match dimension " +
                         std::to_string(dimension()));
  }
}

void VIProblem::CheckComponent(Index m) const {
  if (m < 0 || m >= component_count()) {
    throw ParameterError("operator: component index " + std::to_string(m) +
                         " out of range [0, " +
                         std::to_string(component_count()) + ")");
  }
}

Vector VIProblem::EvalFull(const Vector& z) const {
  CheckDimension(z);
  return std::visit(
      Overloaded{
          [&](const BilinearGame& g) { return GameOperator(g.mean, z); },
          [&](const AffineOperator& a) { return a.Apply(z); },
          [&](const MixingVI& mix) {
            return Vector(mix.LocalPart(z) + mix.ConsensusPart(z));
          },
      },
      payload_);
}

Vector VIProblem::EvalComponent(Index m, const Vector& z) const {
  CheckComponent(m);
  CheckDimension(z);
  if (const auto* g = game()) return GameOperator(g->matrices[m], z);
  return EvalFull(z);
}

double VIProblem::EvalCoordinate(Index i, const Vector& z) const {
  CheckDimension(z);
  if (i < 0 || i >= dimension()) {
    throw ParameterError("operator: coordinate index out of range");
  }
  return std::visit(
      Overloaded{
          [&](const BilinearGame& g) -> double {
            const Index n = g.block_size();
            if (i < n) return g.mean.col(i).dot(z.tail(n));
            return -g.mean.row(i - n).dot(z.head(n));
          },
          [&](const AffineOperator& a) -> double {
            return a.matrix.row(i).dot(z) - a.offset(i);
          },
          [&](const MixingVI& mix) -> double {
            const Index d = mix.worker_dimension;
            const Index m = i / d;
            const Index r = i % d;
            const AffineOperator& w = mix.workers[m];
            double avg = 0.0;
            for (Index j = 0; j < mix.worker_count(); ++j) avg += z(j * d + r);
            avg /= static_cast<double>(mix.worker_count());
            return w.matrix.row(r).dot(z.segment(m * d, d)) - w.offset(r) +
                   mix.lambda * (z(i) - avg);
          },
      },
      payload_);
}

Vector VIProblem::ApplyLinear(const Vector& v) const {
  CheckDimension(v);
  return std::visit(
      Overloaded{
          [&](const BilinearGame& g) { return GameOperator(g.mean, v); },
          [&](const AffineOperator& a) { return Vector(a.matrix * v); },
          [&](const MixingVI& mix) {
            const Index d = mix.worker_dimension;
            Vector out = mix.ConsensusPart(v);
            for (Index m = 0; m < mix.worker_count(); ++m) {
              out.segment(m * d, d) += mix.workers[m].matrix * v.segment(m * d, d);
            }
            return out;
          },
      },
      payload_);
}

Vector VIProblem::ApplyLinearTranspose(const Vector& v) const {
  CheckDimension(v);
  return std::visit(
      Overloaded{
          [&](const BilinearGame& g) { return GameOperatorTranspose(g.mean, v); },
          [&](const AffineOperator& a) {
            return Vector(a.matrix.transpose() * v);
          },
          [&](const MixingVI& mix) {
            const Index d = mix.worker_dimension;
            Vector out = mix.ConsensusPart(v);
            for (Index m = 0; m < mix.worker_count(); ++m) {
              out.segment(m * d, d) +=
                  mix.workers[m].matrix.transpose() * v.segment(m * d, d);
            }
            return out;
          },
      },
      payload_);
}

Vector VIProblem::ApplyComponentLinear(Index m, const Vector& v) const {
  CheckComponent(m);
  if (const auto* g = game()) return GameOperator(g->matrices[m], v);
  return ApplyLinear(v);
}

Vector VIProblem::ApplyComponentLinearTranspose(Index m, const Vector& v) const {
  CheckComponent(m);
  if (const auto* g = game()) return GameOperatorTranspose(g->matrices[m], v);
  return ApplyLinearTranspose(v);
}

Eigen::MatrixXd VIProblem::DenseLinearPart() const {
  const Index d = dimension();
  Eigen::MatrixXd out(d, d);
  for (Index j = 0; j < d; ++j) out.col(j) = ApplyLinear(Vector::Unit(d, j));
  return out;
}

Vector WealthBase(int n) {
  if (n < 1) throw ParameterError("wealth: n must be >= 1");
  const Index cells = static_cast<Index>(n) * n;
  const double half = n / 2.0;
  Vector w(cells);
  for (Index i = 0; i < cells; ++i) {
    const double row = static_cast<double>(i / n);
    const double col = static_cast<double>(i % n);
    const double offset = std::min(std::abs(row - half), std::abs(col - half));
    w(i) = 1.0 - (2.0 / n) * offset;
  }
  return w;
}

double CellDistance(Index i, Index j, int n) {
  const Index cells = static_cast<Index>(n) * n;
  if (n < 1 || i < 0 || j < 0 || i >= cells || j >= cells) {
    throw ParameterError("cell_distance: index out of range");
  }
  const double dr = static_cast<double>(i / n - j / n);
  const double dc = static_cast<double>(i % n - j % n);
  return std::sqrt(dr * dr + dc * dc);
}

VIProblem GeneratePoliceBurglar(int n, double theta, double sigma_w,
                                std::uint64_t seed) {
  if (n < 1) throw ParameterError("policeman-burglar: n must be >= 1");
  if (!(theta > 0.0)) throw ParameterError("policeman-burglar: theta must be > 0");
  if (!(sigma_w >= 0.0)) {
    throw ParameterError("policeman-burglar: sigma_w must be >= 0");
  }
  const Index cells = static_cast<Index>(n) * n;
  const Vector wealth = WealthBase(n);

  Eigen::MatrixXd catch_miss(cells, cells);
  for (Index i = 0; i < cells; ++i) {
    for (Index j = 0; j < cells; ++j) {
      catch_miss(i, j) = 1.0 - std::exp(-theta * CellDistance(i, j, n));
    }
  }

  RngStream rng(seed, 0);
  BilinearGame game;
  game.side = n;
  game.mean = Eigen::MatrixXd::Zero(cells, cells);
  for (int k = 0; k < n; ++k) {
    const double xi = sigma_w * rng.Uniform();
    const Vector scaled = wealth * (1.0 + xi);
    game.matrices.push_back(scaled.asDiagonal() * catch_miss);
    game.mean += game.matrices.back();
  }
  game.mean /= static_cast<double>(n);

  VIProblem problem(std::move(game), ProxSpec::ProductOfSimplices({cells, cells}),
                    ProblemConstants{}, std::nullopt);
  ProblemConstants& c = problem.mutable_constants();
  c.lipschitz = EstimateLipschitz(problem, kGeneratorLipschitzTol);
  for (Index m = 0; m < problem.component_count(); ++m) {
    c.component_lipschitz.push_back(
        EstimateComponentLipschitz(problem, m, kGeneratorLipschitzTol));
  }
  c.component_d.assign(problem.component_count(), 0.0);
  return problem;
}

VIProblem GenerateQuadratic(Index d, double mu, double lipschitz,
                            std::uint64_t seed) {
  if (d < 1) throw ParameterError("quadratic: d must be >= 1");
  if (!(mu > 0.0)) throw ParameterError("quadratic: mu must be > 0");
  if (!(lipschitz >= mu)) throw ParameterError("quadratic: requires mu <= L");

  RngStream rng(seed, 0);
  auto gaussian = [&](Index rows, Index cols) {
    Eigen::MatrixXd g(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) g(i, j) = rng.Normal();
    }
    return g;
  };
  const Eigen::MatrixXd g1 = gaussian(d, d);
  const Eigen::MatrixXd g2 = gaussian(d, d);
  const Eigen::MatrixXd skew = 0.5 * (g1 - g1.transpose());
  const Eigen::MatrixXd psd = g2 * g2.transpose() / static_cast<double>(d);
  const Eigen::MatrixXd shape = skew + psd;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);

  // ||mu I + c shape|| is convex in c, equals mu at c = 0 and grows without
  // bound, so the target norm is crossed exactly once for c > 0.
  double scale = 0.0;
  if (lipschitz > mu) {
    auto norm_at = [&](double c) { return SpectralNorm(mu * identity + c * shape); };
    double lo = 0.0;
    double hi = 1.0;
    while (norm_at(hi) < lipschitz) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (norm_at(mid) < lipschitz ? lo : hi) = mid;
    }
    scale = 0.5 * (lo + hi);
  }
  Eigen::MatrixXd matrix = mu * identity + scale * shape;

  Vector solution(d);
  for (Index i = 0; i < d; ++i) solution(i) = rng.Normal();
  Vector offset = matrix * solution;

  ProblemConstants c;
  c.lipschitz = SpectralNorm(matrix);
  c.mu_f = mu;
  c.component_lipschitz = {c.lipschitz};
  c.component_d = {0.0};
  return VIProblem(AffineOperator{std::move(matrix), std::move(offset)},
                   ProxSpec::Free(d), std::move(c), std::move(solution));
}

VIProblem GenerateMixing(const std::vector<VIProblem>& base, double lambda) {
  if (base.empty()) throw ParameterError("mixing: need at least one worker");
  if (!(lambda > 0.0)) throw ParameterError("mixing: lambda must be > 0");
  const Index d = base.front().dimension();
  MixingVI mix;
  mix.worker_dimension = d;
  mix.lambda = lambda;
  double local_lipschitz = 0.0;
  double mu = std::numeric_limits<double>::infinity();
  for (const VIProblem& p : base) {
    if (p.dimension() != d) throw DimensionError("mixing: workers differ in dimension");
    const AffineOperator* op = p.affine();
    if (op == nullptr || !p.prox().is_free()) {
      throw ParameterError("mixing: workers must be free affine problems");
    }
    mix.workers.push_back(*op);
    local_lipschitz = std::max(local_lipschitz, p.constants().lipschitz);
    mu = std::min(mu, p.constants().mu_f);
  }
  const Index total = d * mix.worker_count();

  VIProblem problem(std::move(mix), ProxSpec::Free(total), ProblemConstants{},
                    std::nullopt);
  const Eigen::MatrixXd jacobian = problem.DenseLinearPart();
  const Vector at_zero = problem.EvalFull(Vector::Zero(total));
  Vector solution = jacobian.partialPivLu().solve(-at_zero);

  ProblemConstants c;
  c.lipschitz = EstimateLipschitz(problem, kGeneratorLipschitzTol);
  c.mu_f = mu;
  c.component_lipschitz = {c.lipschitz};
  c.component_d = {0.0};
  c.local_lipschitz = local_lipschitz;
  c.lambda = lambda;
  return VIProblem(problem.payload(), problem.prox(), std::move(c),
                   std::move(solution));
}

double EstimateLipschitz(const VIProblem& problem, double tol) {
  return PowerIterationNorm(
      [&](const Vector& v) { return problem.ApplyLinear(v); },
      [&](const Vector& v) { return problem.ApplyLinearTranspose(v); },
      problem.dimension(), tol);
}

double EstimateComponentLipschitz(const VIProblem& problem, Index m,
                                  double tol) {
  return PowerIterationNorm(
      [&](const Vector& v) { return problem.ApplyComponentLinear(m, v); },
      [&](const Vector& v) { return problem.ApplyComponentLinearTranspose(m, v); },
      problem.dimension(), tol);
}

std::string ProblemKindName(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kPoliceBurglar:
      return "pvb";
    case ProblemKind::kQuadratic:
      return "quadratic";
    case ProblemKind::kMixing:
      return "mixing";
  }
  return "unknown";
}

std::optional<ProblemKind> ParseProblemKind(const std::string& name) {
  if (name == "pvb") return ProblemKind::kPoliceBurglar;
  if (name == "quadratic") return ProblemKind::kQuadratic;
  if (name == "mixing") return ProblemKind::kMixing;
  return std::nullopt;
}

VIProblem MakeProblem(const ProblemSpec& spec) {
  switch (spec.kind) {
    case ProblemKind::kPoliceBurglar:
      return GeneratePoliceBurglar(spec.side, spec.theta, spec.sigma_w, spec.seed);
    case ProblemKind::kQuadratic:
      return GenerateQuadratic(spec.dimension, spec.mu, spec.lipschitz, spec.seed);
    case ProblemKind::kMixing: {
      if (spec.workers < 1) throw ParameterError("mixing: workers must be >= 1");
      std::vector<VIProblem> base;
      for (Index m = 0; m < spec.workers; ++m) {
        base.push_back(GenerateQuadratic(spec.dimension, spec.mu, spec.lipschitz,
                                         DeriveSeed(spec.seed, m)));
      }
      return GenerateMixing(base, spec.lambda);
    }
  }
  throw ParameterError("unknown problem kind");
}

}  // namespace extrastep
