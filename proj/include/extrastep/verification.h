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

#ifndef EXTRASTEP_VERIFICATION_H_
#define EXTRASTEP_VERIFICATION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "extrastep/estimators.h"
#include "extrastep/problems.h"
#include "extrastep/prox.h"

namespace extrastep {

// One checked inequality: pass iff lhs <= rhs * slack.
struct VerificationRecord {
  std::string lemma;
  std::string variant;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 1.0;
  std::int64_t n = 0;
  bool pass = false;
};

struct VerificationReport {
  std::vector<VerificationRecord> records;

  bool all_pass() const;
  void Append(const VerificationReport& other);
  // Header "lemma,variant,lhs,rhs,slack,n,pass" then one line per record.
  std::string ToCsv() const;
};

// A state for the estimator checks: the anchor point (the snapshot w for
// snapshot variants, z^k for FullDet and Noisy, the previous half step for
// Past) and the half step z^{k+1/2}.
struct EstimatorState {
  Vector anchor;
  Vector z_half;
};

// `count` random feasible states: interior simplex points drawn by
// normalizing exponentials, or z* (or 0) plus standard normals for free
// problems.
std::vector<EstimatorState> RandomStates(const VIProblem& problem, int count,
                                         std::uint64_t seed);

enum class VerifyMode { kExact, kMonteCarlo };

std::string VerifyModeName(VerifyMode mode);

// Whether EnumerateHalf gives the exact distribution of g^{k+1/2}.
bool SupportsExact(const EstimatorKind& kind, const VIProblem& problem);

// Per state, per coordinate |mean - F(z_half)| <= 4 se + 1e-9 (1 + |F|)
// over `draws` samples of g^{k+1/2}. One record per state with
// lhs = max_i |mean_i - F_i| / (4 se_i + 1e-9 (1 + |F_i|)) and rhs = 1.
VerificationReport VerifyUnbiasedness(const EstimatorKind& kind,
                                      const VIProblem& problem,
                                      const std::vector<EstimatorState>& states,
                                      std::int64_t draws, std::uint64_t seed);

// The two Assumption 2 inequalities for every state:
//   "eq11": E|g^{k+1/2} - g^k|^2 <= A |z_half - anchor|^2 + B sigma^2 + D1,
//   "d3":   E|g^{k+1/2} - F(z_half)|^2 <= E |z_half - anchor|^2 + D3,
// with sigma^2 = |F(anchor) - F(z_half)|^2 for Past and 0 otherwise.
// Exact mode enumerates the distribution (slack 1 plus 1e-9 absolute) and
// throws UnsupportedError when SupportsExact is false; Monte Carlo mode
// uses `draws` samples and slack 1 + 5 / sqrt(draws).
VerificationReport VerifyAssumption2(const EstimatorKind& kind,
                                     const VIProblem& problem,
                                     const std::vector<EstimatorState>& states,
                                     VerifyMode mode, std::int64_t draws,
                                     std::uint64_t seed);

}  // namespace extrastep

#endif  // EXTRASTEP_VERIFICATION_H_
