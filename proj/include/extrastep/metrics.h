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

#ifndef EXTRASTEP_METRICS_H_
#define EXTRASTEP_METRICS_H_

#include <vector>

#include "Eigen/Core"
#include "Eigen/Eigenvalues"
#include "extrastep/problems.h"
#include "extrastep/prox.h"

namespace extrastep {

struct GapReport {
  double value = 0.0;
  // Best responses: the row of mean * x and the column of mean^T * y that
  // attain the maximum and minimum.
  Index best_row = -1;
  Index best_column = -1;
};

// max_i (A x)_i - min_j (A^T y)_j for the mean matrix A. Throws
// FeasibilityError when a block sum is off by more than 1e-8.
GapReport DualityGapBilinear(const BilinearGame& game, const Vector& x,
                             const Vector& y);
// Same, with z = (x, y) stacked.
GapReport DualityGapBilinear(const BilinearGame& game, const Vector& z);

// max over `vertices` of <F(u), z - u>. Feasible z and u are assumed, so
// the h terms vanish. Throws ParameterError on an empty list.
double RestrictedGapBruteforce(const VIProblem& problem, const Vector& z,
                               const std::vector<Vector>& vertices);

// Every vertex of the product of simplices (products of unit vectors).
// Throws ParameterError for free prox or more than `limit` vertices.
std::vector<Vector> SimplexProductVertices(const ProxSpec& prox,
                                           std::size_t limit = 1'000'000);

// Gap over the Euclidean ball of radius `radius` around `center` for an
// affine operator with F(center) = 0:
//   max_{|v| <= r} b^T v - v^T H v,  b = J^T (z - center),  H = (J + J^T)/2.
// Solved exactly from an eigendecomposition of H and a scalar secular
// equation. Requires H positive semidefinite.
class BallGap {
 public:
  BallGap(const VIProblem& problem, Vector center, double radius);

  double radius() const { return radius_; }
  const Vector& center() const { return center_; }
  double operator()(const Vector& z) const;

 private:
  const VIProblem* problem_;
  Vector center_;
  double radius_;
  Vector eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

// ||z - z_star||^2. Throws DimensionError on a length mismatch.
double DistanceToSolution(const Vector& z, const Vector& z_star);

}  // namespace extrastep

#endif  // EXTRASTEP_METRICS_H_
