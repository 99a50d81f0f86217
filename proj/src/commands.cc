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

#include "extrastep/commands.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "extrastep/errors.h"
#include "extrastep/estimators.h"
#include "extrastep/problems.h"
#include "extrastep/solver.h"
#include "extrastep/verification.h"

namespace extrastep {
namespace {

namespace fs = std::filesystem;

constexpr char kComparisonFile[] = "comparison.csv";
constexpr char kAggregateFile[] = "aggregate.csv";

std::ofstream OpenForWrite(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out = OpenForWrite(path);
  out << text;
  if (!out) throw std::runtime_error("write failed: '" + path.string() + "'");
}

std::string HeaderValue(const TraceFile& t, const std::string& key) {
  const std::string* v = t.Find(key);
  return v ? *v : std::string();
}

std::string AxisFor(const TraceFile& t, const std::optional<std::string>& axis) {
  if (axis) return *axis;
  const std::string configured = HeaderValue(t, "output.axis");
  if (!configured.empty() && configured != "auto") return configured;
  const auto variant = ParseVariant(HeaderValue(t, "solver.estimator"));
  return variant ? DefaultAxis(*variant) : "k";
}

std::optional<double> Metric(const TraceRow& row) {
  if (row.gap_avg) return row.gap_avg;
  if (row.gap_last) return row.gap_last;
  return row.dist_sq;
}

const char* MetricName(const TraceRow& row) {
  if (row.gap_avg) return "gap_avg";
  if (row.gap_last) return "gap_last";
  if (row.dist_sq) return "dist_sq";
  return "";
}

std::string Cell(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string();
}

VIProblem ProblemFor(const Config& config) { return MakeProblem(config.problem); }

RunTrace Execute(const RunPlan& plan, const VIProblem& problem) {
  return RunSolver(problem, plan.kind, plan.solver);
}

void WriteRun(const fs::path& path, const RunPlan& plan, const VIProblem& problem,
              const RunTrace& trace) {
  std::ofstream out = OpenForWrite(path);
  WriteTrace(out, plan, problem, trace);
  if (!out) throw std::runtime_error("write failed: '" + path.string() + "'");
}

std::string Summary(const RunPlan& plan, const RunTrace& trace) {
  const TraceRow& last = trace.rows.back();
  std::ostringstream s;
  s << "run estimator=" << plan.kind.name() << " K=" << plan.solver.iterations
    << " gamma=" << FormatDouble(plan.solver.gamma)
    << " tau=" << FormatDouble(plan.solver.tau);
  if (last.dist_sq) s << " dist_sq=" << FormatDouble(*last.dist_sq);
  if (last.gap_last) s << " gap_last=" << FormatDouble(*last.gap_last);
  if (last.gap_avg) s << " gap_avg=" << FormatDouble(*last.gap_avg);
  const CostLedger& c = last.costs;
  s << " full_calls=" << c.full_oracle_calls << " comp_calls=" << c.component_oracle_calls
    << " coords=" << c.coordinates_touched << " bits=" << c.bits_sent
    << " comms=" << c.communications << " local_steps=" << c.local_steps;
  return s.str();
}

std::string RunName(const Config& single, std::size_t multiplier_index) {
  return VariantName(single.estimators.front()) + "_seed" +
         std::to_string(single.seeds.front()) + "_g" + std::to_string(multiplier_index);
}

std::vector<NamedTrace> LoadTraces(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("'" + dir.string() + "' is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<NamedTrace> out;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::string first;
    std::getline(in, first);
    if (first.rfind("# meta.format", 0) != 0) continue;
    in.seekg(0);
    out.push_back({f.stem().string(), ReadTrace(in)});
  }
  return out;
}

void WriteReports(const fs::path& dir, const std::vector<NamedTrace>& traces,
                  const std::optional<std::string>& axis) {
  WriteFile(dir / kComparisonFile, ComparisonCsv(traces, axis));
  WriteFile(dir / kAggregateFile, AggregateCsv(traces, axis));
}

// Problem used to verify `variant`: the configured one, or a mixing
// problem built from the same parameters for the local estimator.
ProblemSpec VerificationSpec(const Config& config, EstimatorVariant variant) {
  ProblemSpec spec = config.problem;
  if (variant == EstimatorVariant::kLocal) spec.kind = ProblemKind::kMixing;
  return spec;
}

}  // namespace

std::uint64_t BudgetValue(const TraceRow& row, const std::string& axis) {
  const CostLedger& c = row.costs;
  if (axis == "full_calls") return c.full_oracle_calls;
  if (axis == "comp_calls") return c.component_oracle_calls;
  if (axis == "coords") return c.coordinates_touched;
  if (axis == "bits") return c.bits_sent;
  if (axis == "comms") return c.communications;
  if (axis == "local_steps") return c.local_steps;
  if (axis == "k") return static_cast<std::uint64_t>(row.k);
  throw ParameterError("unknown budget axis '" + axis + "'");
}

void CmdGen(const Config& config, std::ostream& out) {
  const VIProblem problem = ProblemFor(config);
  std::istringstream rendered(RenderConfig(config));
  std::string line;
  while (std::getline(rendered, line)) {
    if (line.rfind("problem.", 0) == 0) out << line << '\n';
  }
  const ProblemConstants& c = problem.constants();
  out << "# dimension = " << problem.dimension() << '\n';
  out << "# components = " << problem.component_count() << '\n';
  out << "# L = " << FormatDouble(c.lipschitz) << '\n';
  out << "# D = " << FormatDouble(c.bounded_d) << '\n';
  out << "# mu_f = " << FormatDouble(c.mu_f) << '\n';
  out << "# mu_h = " << FormatDouble(c.mu_h) << '\n';
  if (!c.component_lipschitz.empty()) {
    out << "# L_m = ";
    for (std::size_t i = 0; i < c.component_lipschitz.size(); ++i) {
      out << (i ? ", " : "") << FormatDouble(c.component_lipschitz[i]);
    }
    out << '\n';
  }
  if (problem.mixing() != nullptr) {
    out << "# L_local = " << FormatDouble(c.local_lipschitz) << '\n';
    out << "# lambda = " << FormatDouble(c.lambda) << '\n';
  }
  out << "# solution_known = " << (problem.known_solution() ? "true" : "false") << '\n';
}

void CmdRun(const Config& config, std::ostream& log) {
  const std::vector<Config> runs = ExpandSweep(config);
  if (runs.size() != 1) {
    throw ConfigError({"run: list-valued fields need the sweep command"});
  }
  const VIProblem problem = ProblemFor(config);
  const RunPlan plan = Resolve(runs.front(), problem);
  const RunTrace trace = Execute(plan, problem);
  WriteRun(config.trace_path, plan, problem, trace);
  log << Summary(plan, trace) << '\n';
}

void CmdSweep(const Config& config, std::ostream& log) {
  const std::vector<Config> runs = ExpandSweep(config);
  const fs::path dir(config.directory);
  fs::create_directories(dir);
  const VIProblem problem = ProblemFor(config);
  std::vector<NamedTrace> traces;
  for (const Config& single : runs) {
    const auto& mults = config.gamma_multipliers;
    const std::size_t mult_index = static_cast<std::size_t>(
        std::find(mults.begin(), mults.end(), single.gamma_multipliers.front()) -
        mults.begin());
    RunPlan plan = Resolve(single, problem);
    const std::string name = RunName(single, mult_index);
    plan.config.trace_path = (dir / (name + ".csv")).string();
    const RunTrace trace = Execute(plan, problem);
    std::ostringstream buffer;
    WriteTrace(buffer, plan, problem, trace);
    WriteFile(plan.config.trace_path, buffer.str());
    std::istringstream reread(buffer.str());
    traces.push_back({name, ReadTrace(reread)});
    log << name << ": " << Summary(plan, trace) << '\n';
  }
  std::sort(traces.begin(), traces.end(),
            [](const NamedTrace& a, const NamedTrace& b) { return a.name < b.name; });
  WriteReports(dir, traces, config.axis);
  log << "sweep: " << traces.size() << " runs in " << dir.string() << '\n';
}

void CmdReport(const std::string& directory, const std::optional<std::string>& axis,
               std::ostream& log) {
  const std::vector<NamedTrace> traces = LoadTraces(directory);
  if (traces.empty()) throw std::runtime_error("report: no traces in '" + directory + "'");
  WriteReports(directory, traces, axis);
  log << "report: " << traces.size() << " traces in " << directory << '\n';
}

int CmdVerify(const Config& config, std::ostream& csv, std::ostream& log) {
  std::vector<EstimatorVariant> variants = config.verify_variants;
  if (variants.empty()) {
    variants = {EstimatorVariant::kNoisy, EstimatorVariant::kPast,
                EstimatorVariant::kVR,    EstimatorVariant::kCoord,
                EstimatorVariant::kQuant, EstimatorVariant::kQVR,
                EstimatorVariant::kIS,    EstimatorVariant::kLocal};
  }
  VerificationReport report;
  VerificationReport controls;
  for (EstimatorVariant v : variants) {
    Config single = config;
    single.problem = VerificationSpec(config, v);
    single.estimators = {v};
    single.seeds = {config.seeds.front()};
    single.gamma_multipliers = {1.0};
    const VIProblem problem = MakeProblem(single.problem);
    const RunPlan plan = Resolve(single, problem);
    const AssumptionConstants& c = plan.constants;
    log << "constants " << plan.kind.name() << " A=" << FormatDouble(c.a)
        << " B=" << FormatDouble(c.b) << " C=" << FormatDouble(c.c)
        << " E=" << FormatDouble(c.e) << " D1=" << FormatDouble(c.d1)
        << " D2=" << FormatDouble(c.d2) << " D3=" << FormatDouble(c.d3)
        << " rho=" << FormatDouble(c.rho) << '\n';

    const auto states = RandomStates(problem, config.verify_states, config.verify_seed);
    report.Append(VerifyUnbiasedness(plan.kind, problem, states, config.verify_draws,
                                     config.verify_seed));
    const VerifyMode mode = config.verify_mode.value_or(
        SupportsExact(plan.kind, problem) ? VerifyMode::kExact : VerifyMode::kMonteCarlo);
    const auto pairs =
        mode == VerifyMode::kExact
            ? RandomStates(problem, config.verify_pairs, config.verify_seed + 1)
            : states;
    report.Append(VerifyAssumption2(plan.kind, problem, pairs, mode,
                                    config.verify_draws, config.verify_seed));
  }
  if (config.negative_control) {
    const VIProblem problem = MakeProblem(config.problem);
    EstimatorKind bad = EstimatorKind::Coord();
    bad.coord_scale = 0.5;
    const auto states = RandomStates(problem, config.verify_states, config.verify_seed);
    controls = VerifyUnbiasedness(bad, problem, states, config.verify_draws,
                                  config.verify_seed);
  }
  VerificationReport all = report;
  all.Append(controls);
  csv << all.ToCsv();

  const bool checks_pass = report.all_pass();
  bool controls_fail = true;
  for (const auto& r : controls.records) controls_fail = controls_fail && !r.pass;
  log << "verify: " << report.records.size() << " checks, "
      << (checks_pass ? "all pass" : "FAILURES") << "; negative control "
      << (config.negative_control ? (controls_fail ? "rejected" : "NOT rejected")
                                  : "skipped")
      << '\n';
  return checks_pass && controls_fail ? kExitOk : kExitVerificationFailure;
}

std::string ComparisonCsv(const std::vector<NamedTrace>& traces,
                          const std::optional<std::string>& axis) {
  std::ostringstream out;
  out << "run,estimator,seed,gamma_multiplier,gamma,axis,budget,k,gap_avg,gap_last,"
         "dist_sq\n";
  for (const auto& [name, t] : traces) {
    const std::string ax = AxisFor(t, axis);
    const std::string prefix = name + ',' + HeaderValue(t, "solver.estimator") + ',' +
                               HeaderValue(t, "solver.seed") + ',' +
                               HeaderValue(t, "solver.gamma_multiplier") + ',' +
                               HeaderValue(t, "solver.gamma") + ',' + ax + ',';
    for (const TraceRow& row : t.rows) {
      out << prefix << BudgetValue(row, ax) << ',' << row.k << ',' << Cell(row.gap_avg)
          << ',' << Cell(row.gap_last) << ',' << Cell(row.dist_sq) << '\n';
    }
  }
  return out.str();
}

std::string AggregateCsv(const std::vector<NamedTrace>& traces,
                         const std::optional<std::string>& axis) {
  struct Cellstats {
    std::string metric;
    std::vector<double> values;
    double budget_sum = 0.0;
  };
  using Group = std::tuple<std::string, std::string, std::int64_t>;
  std::map<Group, Cellstats> groups;
  for (const auto& [name, t] : traces) {
    const std::string ax = AxisFor(t, axis);
    const std::string est = HeaderValue(t, "solver.estimator");
    const std::string mult = HeaderValue(t, "solver.gamma_multiplier");
    for (const TraceRow& row : t.rows) {
      const auto m = Metric(row);
      if (!m) continue;
      Cellstats& g = groups[{est, mult, row.k}];
      g.metric = MetricName(row);
      g.values.push_back(*m);
      g.budget_sum += static_cast<double>(BudgetValue(row, ax));
    }
  }
  std::ostringstream out;
  out << "estimator,gamma_multiplier,k,runs,metric,budget_mean,mean,min,max\n";
  for (const auto& [key, g] : groups) {
    const auto& [est, mult, k] = key;
    double sum = 0.0;
    for (double v : g.values) sum += v;
    const double n = static_cast<double>(g.values.size());
    out << est << ',' << mult << ',' << k << ',' << g.values.size() << ',' << g.metric
        << ',' << FormatDouble(g.budget_sum / n) << ',' << FormatDouble(sum / n) << ','
        << FormatDouble(*std::min_element(g.values.begin(), g.values.end())) << ','
        << FormatDouble(*std::max_element(g.values.begin(), g.values.end())) << '\n';
  }
  return out.str();
}

}  // namespace extrastep
