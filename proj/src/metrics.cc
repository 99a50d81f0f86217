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

#include "extrastep/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "extrastep/errors.h"

namespace extrastep {
namespace {

constexpr double kBlockSumTol = 1e-8;

void CheckSimplex(const Vector& v, Index n, const char* what) {
  if (v.size() != n) {
    throw DimensionError(std::string("duality gap: ") + what + " has wrong length");
  }
  if (std::abs(v.sum() - 1.0) > kBlockSumTol) {
    throw FeasibilityError(std::string("duality gap: ") + what +
                           " does not sum to 1");
  }
}

}  // namespace

GapReport DualityGapBilinear(const BilinearGame& game, const Vector& x,
                             const Vector& y) {
  const Index n = game.block_size();
  CheckSimplex(x, n, "x");
  CheckSimplex(y, n, "y");
  const Vector ax = game.mean * x;
  const Vector aty = game.mean.transpose() * y;
  GapReport out;
  const double hi = ax.maxCoeff(&out.best_row);
  const double lo = aty.minCoeff(&out.best_column);
  out.value = hi - lo;
  return out;
}

GapReport DualityGapBilinear(const BilinearGame& game, const Vector& z) {
  const Index n = game.block_size();
  if (z.size() != 2 * n) throw DimensionError("duality gap: z has wrong length");
  return DualityGapBilinear(game, z.head(n), z.tail(n));
}

double RestrictedGapBruteforce(const VIProblem& problem, const Vector& z,
                               const std::vector<Vector>& vertices) {
  if (vertices.empty()) throw ParameterError("restricted gap: empty vertex list");
  double best = -std::numeric_limits<double>::infinity();
  for (const Vector& u : vertices) {
    best = std::max(best, problem.EvalFull(u).dot(z - u));
  }
  return best;
}

std::vector<Vector> SimplexProductVertices(const ProxSpec& prox,
                                           std::size_t limit) {
  if (prox.is_free()) throw ParameterError("vertices: free prox has no vertices");
  const auto blocks = prox.blocks();
  double count = 1.0;
  for (Index b : blocks) count *= static_cast<double>(b);
  if (count > static_cast<double>(limit)) {
    throw ParameterError("vertices: too many vertices to enumerate");
  }
  std::vector<Index> pick(blocks.size(), 0);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  while (true) {
    Vector v = Vector::Zero(prox.dimension());
    Index offset = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      v(offset + pick[b]) = 1.0;
      offset += blocks[b];
    }
    out.push_back(std::move(v));
    std::size_t b = blocks.size();
    while (b > 0) {
      --b;
      if (++pick[b] < blocks[b]) break;
      pick[b] = 0;
      if (b == 0) return out;
    }
  }
}

BallGap::BallGap(const VIProblem& problem, Vector center, double radius)
    : problem_(&problem), center_(std::move(center)), radius_(radius) {
  if (center_.size() != problem.dimension()) {
    throw DimensionError("ball gap: center has wrong length");
  }
  if (!(radius >= 0.0)) throw ParameterError("ball gap: radius must be >= 0");
  const Eigen::MatrixXd j = problem.DenseLinearPart();
  const Eigen::MatrixXd h = 0.5 * (j + j.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  eigenvalues_ = solver.eigenvalues().cwiseMax(0.0);
  eigenvectors_ = solver.eigenvectors();
}

double BallGap::operator()(const Vector& z) const {
  const Vector b = problem_->ApplyLinearTranspose(z - center_);
  const Vector c = eigenvectors_.transpose() * b;
  const double r = radius_;
  if (r == 0.0) return 0.0;
  // v_i(lambda) = c_i / (2 (h_i + lambda)); find the smallest lambda >= 0
  // with |v(lambda)| <= r. Directions with h_i + lambda = 0 and c_i = 0
  // contribute nothing to the objective.
  auto norm_sq = [&](double lambda) {
    double s = 0.0;
    for (Index i = 0; i < c.size(); ++i) {
      const double den = eigenvalues_(i) + lambda;
      if (den > 0.0) {
        s += c(i) * c(i) / (4.0 * den * den);
      } else if (c(i) != 0.0) {
        return std::numeric_limits<double>::infinity();
      }
    }
    return s;
  };
  double lambda = 0.0;
  if (norm_sq(0.0) > r * r) {
    double lo = 0.0;
    double hi = b.norm() / (2.0 * r);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (norm_sq(mid) > r * r) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    lambda = hi;
  }
  double value = 0.0;
  for (Index i = 0; i < c.size(); ++i) {
    const double den = eigenvalues_(i) + lambda;
    if (den <= 0.0) continue;
    const double v = c(i) / (2.0 * den);
    value += c(i) * v - eigenvalues_(i) * v * v;
  }
  return value;
}

double DistanceToSolution(const Vector& z, const Vector& z_star) {
  if (z.size() != z_star.size()) {
    throw DimensionError("distance: vector lengths differ");
  }
  return (z - z_star).squaredNorm();
}

}  // namespace extrastep
