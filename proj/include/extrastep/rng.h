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

#ifndef EXTRASTEP_RNG_H_
#define EXTRASTEP_RNG_H_

#include <cstdint>
#include <random>

namespace extrastep {

// Deterministic random stream identified by (seed, stream_id).
//
// The engine is std::mt19937_64 seeded through std::seed_seq from the four
// 32-bit halves of (seed, stream_id); both are fully specified by the C++
// standard. All distributions are implemented here rather than taken from
// <random>, whose distribution algorithms are implementation-defined, so a
// given (seed, stream_id) yields the same draws on every platform.
//
// Single-owner mutable state; give each concurrent run its own stream_id.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();

  // Uniform on the inclusive integer range [lo, hi]; unbiased (rejection).
  std::uint64_t UniformInt(std::uint64_t lo, std::uint64_t hi);

  // Standard normal via the Box-Muller transform.
  double Normal();

  // True with probability p.
  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// Derives an independent 64-bit seed for a sub-object (e.g. one worker of a
// federated problem) from a parent seed.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index);

}  // namespace extrastep

#endif  // EXTRASTEP_RNG_H_
