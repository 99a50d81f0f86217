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

#include "extrastep/trace_io.h"

#include <charconv>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace extrastep {
namespace {

constexpr char kFormat[] = "extrastep-trace 1";

bool IsConfigKey(const std::string& key) {
  return key.rfind("problem.", 0) == 0 || key.rfind("solver.", 0) == 0 ||
         key.rfind("output.", 0) == 0 || key.rfind("verify.", 0) == 0;
}

std::string Optional(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string();
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T ParseCell(const std::string& cell, const char* what) {
  T out{};
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    throw std::runtime_error(std::string("trace: bad ") + what + " cell '" + cell + "'");
  }
  return out;
}

std::optional<double> OptionalCell(const std::string& cell, const char* what) {
  if (cell.empty()) return std::nullopt;
  return ParseCell<double>(cell, what);
}

}  // namespace

const std::vector<std::string>& TraceColumns() {
  static const std::vector<std::string> kColumns = {
      "k",     "full_calls", "comp_calls", "coords",   "bits",   "comms",
      "local_steps", "dist_sq", "lyapunov", "gap_last", "gap_avg"};
  return kColumns;
}

std::string FormatDouble(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string FormatTraceRow(const TraceRow& row) {
  const CostLedger& c = row.costs;
  std::ostringstream out;
  out << row.k << ',' << c.full_oracle_calls << ',' << c.component_oracle_calls
      << ',' << c.coordinates_touched << ',' << c.bits_sent << ','
      << c.communications << ',' << c.local_steps << ',' << Optional(row.dist_sq)
      << ',' << Optional(row.lyapunov) << ',' << Optional(row.gap_last) << ','
      << Optional(row.gap_avg);
  return out.str();
}

std::vector<std::pair<std::string, std::string>> TraceHeader(
    const RunPlan& plan, const VIProblem& problem, const RunTrace& trace) {
  std::vector<std::pair<std::string, std::string>> h;
  h.emplace_back("meta.format", kFormat);
  h.emplace_back("meta.version", kLibraryVersion);
  std::istringstream config(RenderConfig(plan.config));
  std::string line;
  while (std::getline(config, line)) {
    const auto eq = line.find(" = ");
    h.emplace_back(line.substr(0, eq), line.substr(eq + 3));
  }
  const AssumptionConstants& c = plan.constants;
  const ProblemConstants& pc = problem.constants();
  h.emplace_back("constants.estimator", plan.kind.name());
  h.emplace_back("constants.A", FormatDouble(c.a));
  h.emplace_back("constants.B", FormatDouble(c.b));
  h.emplace_back("constants.C", FormatDouble(c.c));
  h.emplace_back("constants.E", FormatDouble(c.e));
  h.emplace_back("constants.D1", FormatDouble(c.d1));
  h.emplace_back("constants.D2", FormatDouble(c.d2));
  h.emplace_back("constants.D3", FormatDouble(c.d3));
  h.emplace_back("constants.rho", FormatDouble(c.rho));
  h.emplace_back("constants.tau_star", FormatDouble(c.tau_star));
  h.emplace_back("constants.gamma_max", FormatDouble(plan.bound.gamma_max));
  h.emplace_back("constants.T_bound", FormatDouble(plan.bound.lyapunov_weight));
  h.emplace_back("constants.dimension", std::to_string(problem.dimension()));
  h.emplace_back("constants.components", std::to_string(problem.component_count()));
  h.emplace_back("constants.L", FormatDouble(pc.lipschitz));
  h.emplace_back("constants.D", FormatDouble(pc.bounded_d));
  h.emplace_back("constants.mu_f", FormatDouble(pc.mu_f));
  h.emplace_back("constants.mu_h", FormatDouble(pc.mu_h));
  h.emplace_back("run.stride", std::to_string(trace.stride));
  h.emplace_back("run.snapshot_moves", std::to_string(trace.snapshot_moves));
  h.emplace_back("initial.dist_sq", Optional(trace.initial.dist_sq));
  h.emplace_back("initial.lyapunov", Optional(trace.initial.lyapunov));
  h.emplace_back("initial.gap", Optional(trace.initial.gap_last));
  return h;
}

void WriteTrace(std::ostream& out, const RunPlan& plan, const VIProblem& problem,
                const RunTrace& trace) {
  for (const auto& [key, value] : TraceHeader(plan, problem, trace)) {
    out << "# " << key << " = " << value << '\n';
  }
  const auto& cols = TraceColumns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << (i ? "," : "") << cols[i];
  }
  out << '\n';
  for (const TraceRow& row : trace.rows) out << FormatTraceRow(row) << '\n';
}

const std::string* TraceFile::Find(const std::string& key) const {
  for (const auto& [k, v] : header) {
    if (k == key) return &v;
  }
  return nullptr;
}

TraceFile ReadTrace(std::istream& in) {
  TraceFile out;
  std::string line;
  bool seen_columns = false;
  const std::size_t ncols = TraceColumns().size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) {
        // Empty values are written as "key = ".
        const auto bare = line.find(" =");
        if (bare == std::string::npos) throw std::runtime_error("trace: bad header line");
        out.header.emplace_back(line.substr(2, bare - 2), "");
        continue;
      }
      out.header.emplace_back(line.substr(2, eq - 2), line.substr(eq + 3));
      continue;
    }
    if (!seen_columns) {
      if (SplitCsv(line) != TraceColumns()) {
        throw std::runtime_error("trace: unexpected column header");
      }
      seen_columns = true;
      continue;
    }
    const auto cells = SplitCsv(line);
    if (cells.size() != ncols) throw std::runtime_error("trace: wrong column count");
    TraceRow row;
    row.k = ParseCell<std::int64_t>(cells[0], "k");
    row.costs.full_oracle_calls = ParseCell<std::uint64_t>(cells[1], "full_calls");
    row.costs.component_oracle_calls = ParseCell<std::uint64_t>(cells[2], "comp_calls");
    row.costs.coordinates_touched = ParseCell<std::uint64_t>(cells[3], "coords");
    row.costs.bits_sent = ParseCell<std::uint64_t>(cells[4], "bits");
    row.costs.communications = ParseCell<std::uint64_t>(cells[5], "comms");
    row.costs.local_steps = ParseCell<std::uint64_t>(cells[6], "local_steps");
    row.dist_sq = OptionalCell(cells[7], "dist_sq");
    row.lyapunov = OptionalCell(cells[8], "lyapunov");
    row.gap_last = OptionalCell(cells[9], "gap_last");
    row.gap_avg = OptionalCell(cells[10], "gap_avg");
    out.rows.push_back(row);
  }
  if (!seen_columns) throw std::runtime_error("trace: missing column header");
  return out;
}

Config ConfigFromTraceHeader(const TraceFile& trace) {
  std::string text;
  for (const auto& [key, value] : trace.header) {
    if (IsConfigKey(key)) text += key + " = " + value + "\n";
  }
  return ParseConfig(text);
}

}  // namespace extrastep
