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

#ifndef EXTRASTEP_CONFIG_H_
#define EXTRASTEP_CONFIG_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "extrastep/estimators.h"
#include "extrastep/problems.h"
#include "extrastep/solver.h"
#include "extrastep/verification.h"

namespace extrastep {

// Malformed configuration text. what() joins the messages, one per line;
// each message names its line ("line 3: ...") when it has one.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> messages);
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
};

enum class QuantizerKind { kIdentity, kRandK };

// Experiment description. std::nullopt stands for "auto"; list-valued
// fields drive sweeps.
struct Config {
  ProblemSpec problem;

  std::vector<EstimatorVariant> estimators = {EstimatorVariant::kFullDet};
  double noise_sigma = 0.0;
  QuantizerKind quantizer = QuantizerKind::kRandK;
  std::optional<Index> keep;
  std::optional<std::vector<double>> weights;
  std::optional<double> split;
  std::optional<double> gamma;
  // Applied to the auto step size only.
  std::vector<double> gamma_multipliers = {1.0};
  std::optional<double> tau;
  std::int64_t iterations = 1000;
  std::optional<double> lyapunov_weight;
  std::optional<Regime> regime;
  bool averaging = true;
  std::vector<std::uint64_t> seeds = {1};

  std::optional<std::int64_t> stride;
  std::string trace_path = "trace.csv";
  std::string directory = "sweep";
  // Budget axis of the comparison CSV; nullopt picks one per estimator.
  std::optional<std::string> axis;

  std::vector<EstimatorVariant> verify_variants;
  int verify_states = 5;
  int verify_pairs = 100;
  std::int64_t verify_draws = 100'000;
  std::optional<VerifyMode> verify_mode;
  bool negative_control = true;
  std::uint64_t verify_seed = 1;

  friend bool operator==(const Config&, const Config&) = default;
};

// Line-oriented `section.key = value` text with `#` comments, followed by
// `section.key=value` overrides that replace values from the text. Collects
// every error before throwing ConfigError. With `require_solver`,
// problem.kind, solver.estimator and solver.K must be set.
Config ParseConfig(const std::string& text,
                   const std::vector<std::string>& overrides = {},
                   bool require_solver = true);

// Text that ParseConfig maps back to `config`.
std::string RenderConfig(const Config& config);

// Single-valued configs of the cross product estimators x seeds x
// gamma multipliers. Throws ConfigError for an empty sweep.
std::vector<Config> ExpandSweep(const Config& config);

// A single run with every auto field resolved.
struct RunPlan {
  Config config;  // single-valued; autos replaced by the resolved values
  EstimatorKind kind;
  SolverConfig solver;
  AssumptionConstants constants;
  StepSize bound;
};

// Resolves regime, split, weights, keep, tau, T and gamma against
// `problem`. Expects a single-valued config.
RunPlan Resolve(const Config& config, const VIProblem& problem);

// Budget column used for an estimator's comparison rows.
std::string DefaultAxis(EstimatorVariant variant);

std::string QuantizerKindName(QuantizerKind kind);

}  // namespace extrastep

#endif  // EXTRASTEP_CONFIG_H_
