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

#include "extrastep/quantizer.h"

#include <numeric>
#include <string>
#include <utility>

#include "extrastep/errors.h"

namespace extrastep {
namespace {

std::uint64_t IndexBits(Index d) {
  std::uint64_t bits = 0;
  while ((Index{1} << bits) < d) ++bits;
  return bits;
}

}  // namespace

Quantizer Quantizer::Identity(Index dimension) {
  if (dimension < 1) throw ParameterError("quantizer: dimension must be >= 1");
  return Quantizer(true, dimension, dimension);
}

Quantizer Quantizer::RandK(Index keep, Index dimension) {
  if (dimension < 1) throw ParameterError("quantizer: dimension must be >= 1");
  if (keep < 1 || keep > dimension) {
    throw ParameterError("rand-k: keep count " + std::to_string(keep) +
                         " outside [1, " + std::to_string(dimension) + "]");
  }
  return Quantizer(false, keep, dimension);
}

Vector Quantizer::Apply(const Vector& x, RngStream& rng) const {
  if (x.size() != dimension_) throw DimensionError("quantizer: length mismatch");
  if (identity_) return x;
  // Partial Fisher-Yates: the first `keep_` slots form a uniform subset.
  std::vector<Index> order(dimension_);
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = 0; i < keep_; ++i) {
    const auto j = static_cast<Index>(
        rng.UniformInt(static_cast<std::uint64_t>(i),
                       static_cast<std::uint64_t>(dimension_ - 1)));
    std::swap(order[i], order[j]);
  }
  return ApplyWithSupport(x, std::span<const Index>(order.data(), keep_));
}

Vector Quantizer::ApplyWithSupport(const Vector& x,
                                   std::span<const Index> kept) const {
  if (x.size() != dimension_) throw DimensionError("quantizer: length mismatch");
  Vector out = Vector::Zero(dimension_);
  const double scale = omega();
  for (Index i : kept) out(i) = scale * x(i);
  return out;
}

std::uint64_t Quantizer::BitsPerMessage() const {
  const auto kept = static_cast<std::uint64_t>(keep_);
  if (identity_) return 64 * kept;
  return kept * (64 + IndexBits(dimension_));
}

std::vector<std::vector<Index>> Quantizer::AllSupports() const {
  std::vector<std::vector<Index>> out;
  std::vector<Index> current(keep_);
  std::iota(current.begin(), current.end(), Index{0});
  while (true) {
    out.push_back(current);
    Index pos = keep_ - 1;
    while (pos >= 0 && current[pos] == dimension_ - keep_ + pos) --pos;
    if (pos < 0) break;
    ++current[pos];
    for (Index j = pos + 1; j < keep_; ++j) current[j] = current[j - 1] + 1;
  }
  return out;
}

}  // namespace extrastep
