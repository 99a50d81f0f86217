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

#ifndef EXTRASTEP_TRACE_IO_H_
#define EXTRASTEP_TRACE_IO_H_

#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "extrastep/config.h"
#include "extrastep/problems.h"
#include "extrastep/solver.h"

namespace extrastep {

inline constexpr char kLibraryVersion[] = "0.1.0";

// Column names of trace files, in order.
const std::vector<std::string>& TraceColumns();

// Decimal with 17 significant digits.
std::string FormatDouble(double x);

// "k,full_calls,...,gap_avg" row; unavailable metrics are empty cells.
std::string FormatTraceRow(const TraceRow& row);

// Header lines "# key = value": format and version, the resolved config,
// the constants table and the k = 0 metrics.
std::vector<std::pair<std::string, std::string>> TraceHeader(
    const RunPlan& plan, const VIProblem& problem, const RunTrace& trace);

void WriteTrace(std::ostream& out, const RunPlan& plan, const VIProblem& problem,
                const RunTrace& trace);

struct TraceFile {
  std::vector<std::pair<std::string, std::string>> header;
  std::vector<TraceRow> rows;

  // Header value for `key`, or nullptr.
  const std::string* Find(const std::string& key) const;
};

// Throws std::runtime_error on malformed input.
TraceFile ReadTrace(std::istream& in);

// The config echoed in a trace header; running it reproduces the trace.
Config ConfigFromTraceHeader(const TraceFile& trace);

}  // namespace extrastep

#endif  // EXTRASTEP_TRACE_IO_H_
