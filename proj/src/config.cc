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

#include "extrastep/config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "extrastep/errors.h"

namespace extrastep {
namespace {

// Thrown by value parsers; turned into a line-tagged ConfigError message.
struct BadValue {
  std::string message;
};

std::string Trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string FormatDouble(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double ParseDouble(const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw BadValue{"expected a number, got '" + v + "'"};
  }
  return out;
}

template <typename Int>
Int ParseInt(const std::string& v) {
  Int out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw BadValue{"expected an integer, got '" + v + "'"};
  }
  return out;
}

bool ParseBool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw BadValue{"expected true or false, got '" + v + "'"};
}

bool IsAuto(const std::string& v) { return v == "auto"; }

// "a, b, c" or "[a, b, c]".
std::vector<std::string> SplitList(const std::string& raw) {
  std::string v = Trim(raw);
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') {
    v = v.substr(1, v.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (item.empty()) throw BadValue{"empty list element in '" + raw + "'"};
    out.push_back(item);
  }
  if (out.empty()) throw BadValue{"empty list"};
  return out;
}

std::vector<double> ParseDoubleList(const std::string& v) {
  std::vector<double> out;
  for (const auto& item : SplitList(v)) out.push_back(ParseDouble(item));
  return out;
}

// Integers and inclusive "a..b" ranges.
std::vector<std::uint64_t> ParseSeedList(const std::string& v) {
  std::vector<std::uint64_t> out;
  for (const auto& item : SplitList(v)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(ParseInt<std::uint64_t>(item));
      continue;
    }
    const auto lo = ParseInt<std::uint64_t>(Trim(item.substr(0, dots)));
    const auto hi = ParseInt<std::uint64_t>(Trim(item.substr(dots + 2)));
    if (hi < lo) throw BadValue{"empty range '" + item + "'"};
    if (hi - lo > 1'000'000) throw BadValue{"range too long '" + item + "'"};
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  }
  return out;
}

EstimatorVariant ParseVariantValue(const std::string& v) {
  if (auto parsed = ParseVariant(v)) return *parsed;
  throw BadValue{"unknown estimator kind '" + v + "'"};
}

std::vector<EstimatorVariant> ParseVariantList(const std::string& v) {
  std::vector<EstimatorVariant> out;
  for (const auto& item : SplitList(v)) out.push_back(ParseVariantValue(item));
  return out;
}

template <typename T, typename F>
std::string JoinList(const std::vector<T>& items, F format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += format(items[i]);
  }
  return out;
}

std::string RenderVariants(const std::vector<EstimatorVariant>& v) {
  if (v.empty()) return "default";
  return JoinList(v, VariantName);
}

std::string Str(double x) { return FormatDouble(x); }
std::string Str(std::uint64_t x) { return std::to_string(x); }
std::string Str(std::int64_t x) { return std::to_string(x); }
std::string Str(bool b) { return b ? "true" : "false"; }

struct Key {
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

using KeyTable = std::vector<std::pair<std::string, Key>>;

const KeyTable& Keys() {
  static const KeyTable* table = new KeyTable{
      {"problem.kind",
       {[](Config& c, const std::string& v) {
          auto k = ParseProblemKind(v);
          if (!k) throw BadValue{"unknown problem kind '" + v + "'"};
          c.problem.kind = *k;
        },
        [](const Config& c) { return ProblemKindName(c.problem.kind); }}},
      {"problem.n",
       {[](Config& c, const std::string& v) { c.problem.side = ParseInt<int>(v); },
        [](const Config& c) { return std::to_string(c.problem.side); }}},
      {"problem.theta",
       {[](Config& c, const std::string& v) { c.problem.theta = ParseDouble(v); },
        [](const Config& c) { return Str(c.problem.theta); }}},
      {"problem.sigma_w",
       {[](Config& c, const std::string& v) { c.problem.sigma_w = ParseDouble(v); },
        [](const Config& c) { return Str(c.problem.sigma_w); }}},
      {"problem.d",
       {[](Config& c, const std::string& v) {
          c.problem.dimension = ParseInt<Index>(v);
        },
        [](const Config& c) { return std::to_string(c.problem.dimension); }}},
      {"problem.mu",
       {[](Config& c, const std::string& v) { c.problem.mu = ParseDouble(v); },
        [](const Config& c) { return Str(c.problem.mu); }}},
      {"problem.L",
       {[](Config& c, const std::string& v) { c.problem.lipschitz = ParseDouble(v); },
        [](const Config& c) { return Str(c.problem.lipschitz); }}},
      {"problem.workers",
       {[](Config& c, const std::string& v) {
          c.problem.workers = ParseInt<Index>(v);
        },
        [](const Config& c) { return std::to_string(c.problem.workers); }}},
      {"problem.lambda",
       {[](Config& c, const std::string& v) { c.problem.lambda = ParseDouble(v); },
        [](const Config& c) { return Str(c.problem.lambda); }}},
      {"problem.seed",
       {[](Config& c, const std::string& v) {
          c.problem.seed = ParseInt<std::uint64_t>(v);
        },
        [](const Config& c) { return Str(c.problem.seed); }}},

      {"solver.estimator",
       {[](Config& c, const std::string& v) { c.estimators = ParseVariantList(v); },
        [](const Config& c) { return RenderVariants(c.estimators); }}},
      {"solver.sigma",
       {[](Config& c, const std::string& v) { c.noise_sigma = ParseDouble(v); },
        [](const Config& c) { return Str(c.noise_sigma); }}},
      {"solver.quantizer",
       {[](Config& c, const std::string& v) {
          if (v == "identity") {
            c.quantizer = QuantizerKind::kIdentity;
          } else if (v == "randk") {
            c.quantizer = QuantizerKind::kRandK;
          } else {
            throw BadValue{"unknown quantizer '" + v + "'"};
          }
        },
        [](const Config& c) { return QuantizerKindName(c.quantizer); }}},
      {"solver.keep",
       {[](Config& c, const std::string& v) {
          c.keep = IsAuto(v) ? std::nullopt : std::optional<Index>(ParseInt<Index>(v));
        },
        [](const Config& c) {
          return c.keep ? std::to_string(*c.keep) : std::string("auto");
        }}},
      {"solver.weights",
       {[](Config& c, const std::string& v) {
          c.weights = IsAuto(v) ? std::nullopt
                                : std::optional<std::vector<double>>(ParseDoubleList(v));
        },
        [](const Config& c) {
          return c.weights ? JoinList(*c.weights, [](double x) { return Str(x); })
                           : std::string("auto");
        }}},
      {"solver.split",
       {[](Config& c, const std::string& v) {
          c.split = IsAuto(v) ? std::nullopt : std::optional<double>(ParseDouble(v));
        },
        [](const Config& c) { return c.split ? Str(*c.split) : std::string("auto"); }}},
      {"solver.gamma",
       {[](Config& c, const std::string& v) {
          c.gamma = IsAuto(v) ? std::nullopt : std::optional<double>(ParseDouble(v));
        },
        [](const Config& c) { return c.gamma ? Str(*c.gamma) : std::string("auto"); }}},
      {"solver.gamma_multiplier",
       {[](Config& c, const std::string& v) { c.gamma_multipliers = ParseDoubleList(v); },
        [](const Config& c) {
          return JoinList(c.gamma_multipliers, [](double x) { return Str(x); });
        }}},
      {"solver.tau",
       {[](Config& c, const std::string& v) {
          c.tau = IsAuto(v) ? std::nullopt : std::optional<double>(ParseDouble(v));
        },
        [](const Config& c) { return c.tau ? Str(*c.tau) : std::string("auto"); }}},
      {"solver.K",
       {[](Config& c, const std::string& v) {
          c.iterations = ParseInt<std::int64_t>(v);
        },
        [](const Config& c) { return Str(c.iterations); }}},
      {"solver.T",
       {[](Config& c, const std::string& v) {
          c.lyapunov_weight =
              IsAuto(v) ? std::nullopt : std::optional<double>(ParseDouble(v));
        },
        [](const Config& c) {
          return c.lyapunov_weight ? Str(*c.lyapunov_weight) : std::string("auto");
        }}},
      {"solver.regime",
       {[](Config& c, const std::string& v) {
          if (IsAuto(v)) {
            c.regime = std::nullopt;
            return;
          }
          auto r = ParseRegime(v);
          if (!r) throw BadValue{"unknown regime '" + v + "'"};
          c.regime = *r;
        },
        [](const Config& c) {
          return c.regime ? RegimeName(*c.regime) : std::string("auto");
        }}},
      {"solver.averaging",
       {[](Config& c, const std::string& v) { c.averaging = ParseBool(v); },
        [](const Config& c) { return Str(c.averaging); }}},
      {"solver.seed",
       {[](Config& c, const std::string& v) { c.seeds = ParseSeedList(v); },
        [](const Config& c) {
          return JoinList(c.seeds, [](std::uint64_t s) { return Str(s); });
        }}},

      {"output.stride",
       {[](Config& c, const std::string& v) {
          c.stride = IsAuto(v) ? std::nullopt
                               : std::optional<std::int64_t>(ParseInt<std::int64_t>(v));
        },
        [](const Config& c) { return c.stride ? Str(*c.stride) : std::string("auto"); }}},
      {"output.trace",
       {[](Config& c, const std::string& v) { c.trace_path = v; },
        [](const Config& c) { return c.trace_path; }}},
      {"output.dir",
       {[](Config& c, const std::string& v) { c.directory = v; },
        [](const Config& c) { return c.directory; }}},
      {"output.axis",
       {[](Config& c, const std::string& v) {
          static const std::set<std::string> kAxes = {
              "full_calls", "comp_calls", "coords", "bits", "comms", "local_steps", "k"};
          if (IsAuto(v)) {
            c.axis = std::nullopt;
          } else if (kAxes.count(v)) {
            c.axis = v;
          } else {
            throw BadValue{"unknown budget axis '" + v + "'"};
          }
        },
        [](const Config& c) { return c.axis.value_or("auto"); }}},

      {"verify.variants",
       {[](Config& c, const std::string& v) {
          c.verify_variants = v == "default" ? std::vector<EstimatorVariant>{}
                                             : ParseVariantList(v);
        },
        [](const Config& c) { return RenderVariants(c.verify_variants); }}},
      {"verify.states",
       {[](Config& c, const std::string& v) { c.verify_states = ParseInt<int>(v); },
        [](const Config& c) { return std::to_string(c.verify_states); }}},
      {"verify.pairs",
       {[](Config& c, const std::string& v) { c.verify_pairs = ParseInt<int>(v); },
        [](const Config& c) { return std::to_string(c.verify_pairs); }}},
      {"verify.draws",
       {[](Config& c, const std::string& v) {
          c.verify_draws = ParseInt<std::int64_t>(v);
        },
        [](const Config& c) { return Str(c.verify_draws); }}},
      {"verify.mode",
       {[](Config& c, const std::string& v) {
          if (IsAuto(v)) {
            c.verify_mode = std::nullopt;
          } else if (v == "exact") {
            c.verify_mode = VerifyMode::kExact;
          } else if (v == "mc") {
            c.verify_mode = VerifyMode::kMonteCarlo;
          } else {
            throw BadValue{"unknown verify mode '" + v + "'"};
          }
        },
        [](const Config& c) {
          return c.verify_mode ? VerifyModeName(*c.verify_mode) : std::string("auto");
        }}},
      {"verify.negative_control",
       {[](Config& c, const std::string& v) { c.negative_control = ParseBool(v); },
        [](const Config& c) { return Str(c.negative_control); }}},
      {"verify.seed",
       {[](Config& c, const std::string& v) {
          c.verify_seed = ParseInt<std::uint64_t>(v);
        },
        [](const Config& c) { return Str(c.verify_seed); }}},
  };
  return *table;
}

const Key* FindKey(const std::string& name) {
  for (const auto& [k, handler] : Keys()) {
    if (k == name) return &handler;
  }
  return nullptr;
}

std::vector<std::string> Validate(const Config& c) {
  std::vector<std::string> errors;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };
  check(c.problem.side >= 2, "problem.n must be >= 2");
  check(c.problem.theta > 0.0, "problem.theta must be > 0");
  check(c.problem.sigma_w >= 0.0, "problem.sigma_w must be >= 0");
  check(c.problem.dimension >= 1, "problem.d must be >= 1");
  check(c.problem.mu > 0.0, "problem.mu must be > 0");
  check(c.problem.lipschitz >= c.problem.mu, "problem.L must be >= problem.mu");
  check(c.problem.workers >= 1, "problem.workers must be >= 1");
  check(c.problem.lambda >= 0.0, "problem.lambda must be >= 0");
  check(!c.estimators.empty(), "solver.estimator must name at least one kind");
  check(c.noise_sigma >= 0.0, "solver.sigma must be >= 0");
  check(!c.keep || *c.keep >= 1, "solver.keep must be >= 1");
  check(!c.split || (*c.split > 0.0 && *c.split < 1.0), "solver.split must be in (0, 1)");
  check(!c.gamma || *c.gamma > 0.0, "solver.gamma must be > 0");
  for (double m : c.gamma_multipliers) {
    check(m > 0.0, "solver.gamma_multiplier entries must be > 0");
  }
  check(!c.tau || (*c.tau >= 0.0 && *c.tau < 1.0), "solver.tau must be in [0, 1)");
  check(c.iterations >= 1, "solver.K must be >= 1");
  check(!c.lyapunov_weight || *c.lyapunov_weight >= 0.0, "solver.T must be >= 0");
  check(!c.stride || *c.stride >= 1, "output.stride must be >= 1");
  check(c.verify_states >= 1, "verify.states must be >= 1");
  check(c.verify_pairs >= 1, "verify.pairs must be >= 1");
  check(c.verify_draws >= 1, "verify.draws must be >= 1");
  return errors;
}

std::string JoinMessages(const std::vector<std::string>& messages) {
  std::string out;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i > 0) out += '\n';
    out += messages[i];
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> messages)
    : std::runtime_error(JoinMessages(messages)), messages_(std::move(messages)) {}

std::string QuantizerKindName(QuantizerKind kind) {
  return kind == QuantizerKind::kIdentity ? "identity" : "randk";
}

Config ParseConfig(const std::string& text,
                   const std::vector<std::string>& overrides,
                   bool require_solver) {
  Config config;
  std::vector<std::string> errors;
  std::map<std::string, int> seen;
  std::set<std::string> overridden;

  auto assign = [&](const std::string& tag, const std::string& key,
                    const std::string& value) {
    const Key* handler = FindKey(key);
    if (handler == nullptr) {
      errors.push_back(tag + "unknown key '" + key + "'");
      return false;
    }
    if (value.empty()) {
      errors.push_back(tag + "missing value for '" + key + "'");
      return false;
    }
    try {
      handler->set(config, value);
    } catch (const BadValue& e) {
      errors.push_back(tag + key + ": " + e.message);
      return false;
    }
    return true;
  };

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string tag = "line " + std::to_string(line_no) + ": ";
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(tag + "expected 'section.key = value'");
      continue;
    }
    const std::string key = Trim(line.substr(0, eq));
    if (auto it = seen.find(key); it != seen.end()) {
      errors.push_back(tag + "duplicate key '" + key + "' (first set on line " +
                       std::to_string(it->second) + ")");
      continue;
    }
    if (FindKey(key) != nullptr) seen[key] = line_no;
    assign(tag, key, Trim(line.substr(eq + 1)));
  }
  for (std::size_t i = 0; i < overrides.size(); ++i) {
    const std::string tag = "override " + std::to_string(i + 1) + ": ";
    const auto eq = overrides[i].find('=');
    if (eq == std::string::npos) {
      errors.push_back(tag + "expected 'section.key=value'");
      continue;
    }
    const std::string key = Trim(overrides[i].substr(0, eq));
    if (FindKey(key) != nullptr) overridden.insert(key);
    assign(tag, key, Trim(overrides[i].substr(eq + 1)));
  }
  if (require_solver) {
    for (const char* required : {"problem.kind", "solver.estimator", "solver.K"}) {
      if (!seen.count(required) && !overridden.count(required)) {
        errors.push_back(std::string("missing required key '") + required + "'");
      }
    }
  }
  if (errors.empty()) {
    for (auto& e : Validate(config)) errors.push_back(std::move(e));
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return config;
}

std::string RenderConfig(const Config& config) {
  std::string out;
  for (const auto& [key, handler] : Keys()) {
    out += key + " = " + handler.get(config) + "\n";
  }
  return out;
}

std::vector<Config> ExpandSweep(const Config& config) {
  std::vector<Config> out;
  for (EstimatorVariant v : config.estimators) {
    for (std::uint64_t seed : config.seeds) {
      for (double m : config.gamma_multipliers) {
        Config single = config;
        single.estimators = {v};
        single.seeds = {seed};
        single.gamma_multipliers = {m};
        out.push_back(std::move(single));
      }
    }
  }
  if (out.empty()) throw ConfigError({"sweep: no runs to execute"});
  return out;
}

std::string DefaultAxis(EstimatorVariant variant) {
  switch (variant) {
    case EstimatorVariant::kCoord:
      return "coords";
    case EstimatorVariant::kQuant:
    case EstimatorVariant::kQVR:
      return "bits";
    case EstimatorVariant::kVR:
    case EstimatorVariant::kIS:
      return "comp_calls";
    case EstimatorVariant::kLocal:
      return "comms";
    default:
      return "full_calls";
  }
}

RunPlan Resolve(const Config& config, const VIProblem& problem) {
  if (config.estimators.size() != 1 || config.seeds.size() != 1 ||
      config.gamma_multipliers.size() != 1) {
    throw ConfigError({"resolve: expected a single-valued config; use a sweep"});
  }
  RunPlan plan;
  plan.config = config;
  Config& c = plan.config;
  const ProblemConstants& pc = problem.constants();
  const Index d = problem.dimension();
  const EstimatorVariant variant = config.estimators.front();

  EstimatorKind& kind = plan.kind;
  kind.variant = variant;
  switch (variant) {
    case EstimatorVariant::kNoisy:
    case EstimatorVariant::kPast:
      kind.noise_sigma = c.noise_sigma;
      break;
    case EstimatorVariant::kQuant:
    case EstimatorVariant::kQVR:
      if (c.quantizer == QuantizerKind::kIdentity) {
        kind.quantizer = Quantizer::Identity(d);
      } else {
        if (!c.keep) c.keep = std::max<Index>(1, d / 5);
        if (*c.keep > d) {
          throw ConfigError({"solver.keep exceeds the problem dimension " +
                             std::to_string(d)});
        }
        kind.quantizer = Quantizer::RandK(*c.keep, d);
      }
      break;
    case EstimatorVariant::kIS:
      if (!c.weights) c.weights = ImportanceWeights(pc.component_lipschitz);
      kind.weights = *c.weights;
      break;
    case EstimatorVariant::kLocal:
      if (problem.mixing() == nullptr) {
        throw ConfigError({"solver.estimator = local requires problem.kind = mixing"});
      }
      if (!c.split) c.split = OptimalTau(EstimatorKind::Local(0.5), problem);
      kind.split = *c.split;
      break;
    default:
      break;
  }

  if (!c.regime) {
    c.regime = pc.mu_f + pc.mu_h > 0.0 ? Regime::kStronglyMonotone : Regime::kMonotone;
  }
  if (!c.tau) c.tau = OptimalTau(kind, problem);
  plan.constants = ComputeAssumptionConstants(kind, ConstantInputsFor(kind, problem));
  plan.bound = StepSizeBound(kind, *c.regime, plan.constants, pc.mu_f, pc.mu_h, *c.tau);
  if (!c.lyapunov_weight) c.lyapunov_weight = plan.bound.lyapunov_weight;
  if (!c.gamma) c.gamma = plan.bound.gamma_max * c.gamma_multipliers.front();
  if (!c.stride) c.stride = DefaultStride(c.iterations);

  SolverConfig& s = plan.solver;
  s.gamma = *c.gamma;
  s.tau = *c.tau;
  s.iterations = c.iterations;
  s.lyapunov_weight = *c.lyapunov_weight;
  s.seed = c.seeds.front();
  s.regime = *c.regime;
  s.averaging = c.averaging;
  s.trace_stride = *c.stride;
  return plan;
}

}  // namespace extrastep
