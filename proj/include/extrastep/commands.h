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

#ifndef EXTRASTEP_COMMANDS_H_
#define EXTRASTEP_COMMANDS_H_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "extrastep/config.h"
#include "extrastep/trace_io.h"

namespace extrastep {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitRuntimeError = 2,
  kExitVerificationFailure = 3,
};

// Writes the problem section and the generated problem's constants as
// config text; regeneration from the parameters is deterministic.
void CmdGen(const Config& config, std::ostream& out);

// Runs a single-valued config, writes the trace to config.trace_path and a
// one-line summary to `log`.
void CmdRun(const Config& config, std::ostream& log);

// Runs every config of the sweep into config.directory, then writes
// comparison.csv and aggregate.csv there.
void CmdSweep(const Config& config, std::ostream& log);

// Runs the verification suite; the report CSV goes to `csv`. Returns
// kExitOk iff every check passes and the negative control fails.
int CmdVerify(const Config& config, std::ostream& csv, std::ostream& log);

// Rebuilds comparison.csv and aggregate.csv from the traces in `directory`.
void CmdReport(const std::string& directory, const std::optional<std::string>& axis,
               std::ostream& log);

struct NamedTrace {
  std::string name;
  TraceFile trace;
};

// Columns: run, estimator, seed, gamma_multiplier, gamma, axis, budget, k,
// gap_avg, gap_last, dist_sq.
std::string ComparisonCsv(const std::vector<NamedTrace>& traces,
                          const std::optional<std::string>& axis);

// Per (estimator, gamma_multiplier, k) over seeds: columns estimator,
// gamma_multiplier, k, runs, metric, budget_mean, mean, min, max. The
// metric is gap_avg when present, else gap_last, else dist_sq.
std::string AggregateCsv(const std::vector<NamedTrace>& traces,
                         const std::optional<std::string>& axis);

// Value of a cost column ("full_calls", "coords", ...) or "k" of a row.
std::uint64_t BudgetValue(const TraceRow& row, const std::string& axis);

}  // namespace extrastep

#endif  // EXTRASTEP_COMMANDS_H_
