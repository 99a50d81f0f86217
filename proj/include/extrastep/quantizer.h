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

#ifndef EXTRASTEP_QUANTIZER_H_
#define EXTRASTEP_QUANTIZER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "extrastep/prox.h"
#include "extrastep/rng.h"

namespace extrastep {

// Unbiased random compression: E Q(x) = x and E ||Q(x)||^2 = omega ||x||^2.
//
// RandK keeps `keep` coordinates chosen uniformly without replacement and
// scales them by d / keep, so omega = d / keep. Identity is RandK with
// keep == d.
class Quantizer {
 public:
  static Quantizer Identity(Index dimension);
  // Throws ParameterError unless 1 <= keep <= dimension.
  static Quantizer RandK(Index keep, Index dimension);

  bool is_identity() const { return identity_; }
  Index keep() const { return keep_; }
  Index dimension() const { return dimension_; }
  double omega() const {
    return static_cast<double>(dimension_) / static_cast<double>(keep_);
  }

  Vector Apply(const Vector& x, RngStream& rng) const;
  // Deterministic RandK output for a given kept index set.
  Vector ApplyWithSupport(const Vector& x, std::span<const Index> kept) const;

  // 64 bits per transmitted value, plus ceil(log2 d) per index for RandK.
  std::uint64_t BitsPerMessage() const;

  // All C(d, keep) supports, each equally likely under Apply.
  std::vector<std::vector<Index>> AllSupports() const;

  friend bool operator==(const Quantizer&, const Quantizer&) = default;

 private:
  Quantizer(bool identity, Index keep, Index dimension)
      : identity_(identity), keep_(keep), dimension_(dimension) {}

  bool identity_;
  Index keep_;
  Index dimension_;
};

}  // namespace extrastep

#endif  // EXTRASTEP_QUANTIZER_H_
