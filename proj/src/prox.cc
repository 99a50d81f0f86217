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

#include "extrastep/prox.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <utility>

#include "extrastep/errors.h"

namespace extrastep {

Vector ProjectSimplex(const Vector& v) {
  const Index d = v.size();
  if (d < 1) throw DimensionError("ProjectSimplex: empty vector");

  std::vector<double> sorted(v.data(), v.data() + d);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  // Largest j with sorted[j] - (sum_{i<=j} sorted[i] - 1) / (j + 1) >= 0.
  // j = 0 always qualifies, so the threshold is well defined.
  double cumulative = 0.0;
  double threshold = sorted[0] - 1.0;
  for (Index j = 0; j < d; ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate >= 0.0) threshold = candidate;
  }
  return (v.array() - threshold).max(0.0).matrix();
}

ProxSpec ProxSpec::Free(Index dimension) {
  if (dimension < 1) throw DimensionError("ProxSpec: dimension must be >= 1");
  return ProxSpec(dimension, {});
}

ProxSpec ProxSpec::ProductOfSimplices(std::vector<Index> block_lengths) {
  if (block_lengths.empty()) {
    throw DimensionError("ProxSpec: at least one simplex block required");
  }
  Index total = 0;
  for (Index len : block_lengths) {
    if (len < 1) throw DimensionError("ProxSpec: block lengths must be >= 1");
    total += len;
  }
  return ProxSpec(total, std::move(block_lengths));
}

Vector ProxSpec::Apply(double gamma, const Vector& v) const {
  if (!(gamma > 0.0)) throw ParameterError("prox: gamma must be positive");
  if (v.size() != dimension_) {
    throw DimensionError("prox: vector length " + std::to_string(v.size()) +
                         " does not match dimension " +
                         std::to_string(dimension_));
  }
  if (is_free()) return v;
  Vector out(dimension_);
  Index offset = 0;
  for (Index len : blocks_) {
    out.segment(offset, len) = ProjectSimplex(v.segment(offset, len));
    offset += len;
  }
  return out;
}

bool ProxSpec::IsFeasible(const Vector& z, double tol) const {
  if (z.size() != dimension_) return false;
  if (!z.allFinite()) return false;
  if (is_free()) return true;
  Index offset = 0;
  for (Index len : blocks_) {
    const auto block = z.segment(offset, len);
    if (block.minCoeff() < -tol) return false;
    if (std::abs(block.sum() - 1.0) > tol) return false;
    offset += len;
  }
  return true;
}

Vector ProxSpec::Center() const {
  if (is_free()) return Vector::Zero(dimension_);
  Vector out(dimension_);
  Index offset = 0;
  for (Index len : blocks_) {
    out.segment(offset, len).setConstant(1.0 / static_cast<double>(len));
    offset += len;
  }
  return out;
}

}  // namespace extrastep
