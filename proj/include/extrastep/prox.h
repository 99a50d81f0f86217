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

#ifndef EXTRASTEP_PROX_H_
#define EXTRASTEP_PROX_H_

#include <cstdint>
#include <span>
#include <vector>

#include "Eigen/Core"

namespace extrastep {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Euclidean projection of `v` onto the unit probability simplex
// {x : x >= 0, sum(x) = 1}. Sort-based threshold rule, O(d log d).
// Throws DimensionError on an empty input.
Vector ProjectSimplex(const Vector& v);

// Proximal operator of the regularizer h. Two structures are supported:
// h == 0 on the whole space, and h the indicator of a Cartesian product of
// probability simplices laid out as consecutive blocks.
class ProxSpec {
 public:
  static ProxSpec Free(Index dimension);
  // Block lengths must be positive; their sum is the dimension.
  static ProxSpec ProductOfSimplices(std::vector<Index> block_lengths);

  bool is_free() const { return blocks_.empty(); }
  Index dimension() const { return dimension_; }
  std::span<const Index> blocks() const { return blocks_; }

  // prox_{gamma h}(v). Independent of gamma for both supported h.
  Vector Apply(double gamma, const Vector& v) const;

  // True when every entry is >= -tol and every block sums to 1 within tol.
  bool IsFeasible(const Vector& z, double tol) const;

  // The center of each simplex block (uniform distribution); the origin
  // for the free case.
  Vector Center() const;

  friend bool operator==(const ProxSpec&, const ProxSpec&) = default;

 private:
  ProxSpec(Index dimension, std::vector<Index> blocks)
      : dimension_(dimension), blocks_(std::move(blocks)) {}

  Index dimension_;
  std::vector<Index> blocks_;
};

}  // namespace extrastep

#endif  // EXTRASTEP_PROX_H_
