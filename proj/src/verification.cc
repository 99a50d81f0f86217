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

#include "extrastep/verification.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "extrastep/errors.h"
#include "extrastep/rng.h"

namespace extrastep {
namespace {

constexpr double kAbsoluteSlack = 1e-9;

std::string FormatDouble(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

VerificationRecord MakeRecord(std::string lemma, const EstimatorKind& kind,
                              double lhs, double rhs, double slack,
                              std::int64_t n) {
  VerificationRecord r;
  r.lemma = std::move(lemma);
  r.variant = kind.name();
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = slack;
  r.n = n;
  r.pass = lhs <= rhs * slack + kAbsoluteSlack;
  return r;
}

void CheckState(const VIProblem& problem, const EstimatorState& s) {
  if (s.anchor.size() != problem.dimension() ||
      s.z_half.size() != problem.dimension()) {
    throw DimensionError("verification: state has wrong length");
  }
}

}  // namespace

bool VerificationReport::all_pass() const {
  return std::all_of(records.begin(), records.end(),
                     [](const VerificationRecord& r) { return r.pass; });
}

void VerificationReport::Append(const VerificationReport& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
}

std::string VerificationReport::ToCsv() const {
  std::ostringstream out;
  out << "lemma,variant,lhs,rhs,slack,n,pass\n";
  for (const auto& r : records) {
    out << r.lemma << ',' << r.variant << ',' << FormatDouble(r.lhs) << ','
        << FormatDouble(r.rhs) << ',' << FormatDouble(r.slack) << ',' << r.n
        << ',' << (r.pass ? "true" : "false") << '\n';
  }
  return out.str();
}

std::vector<EstimatorState> RandomStates(const VIProblem& problem, int count,
                                         std::uint64_t seed) {
  const ProxSpec& prox = problem.prox();
  const Index d = problem.dimension();
  RngStream rng(seed, 3);
  auto draw = [&]() {
    Vector z(d);
    if (prox.is_free()) {
      for (Index i = 0; i < d; ++i) z(i) = rng.Normal();
      if (const auto& zs = problem.known_solution()) z += *zs;
      return z;
    }
    Index offset = 0;
    for (Index len : prox.blocks()) {
      for (Index i = 0; i < len; ++i) z(offset + i) = -std::log(1.0 - rng.Uniform());
      z.segment(offset, len) /= z.segment(offset, len).sum();
      offset += len;
    }
    return z;
  };
  std::vector<EstimatorState> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    Vector anchor = draw();
    Vector half = draw();
    out.push_back({std::move(anchor), std::move(half)});
  }
  return out;
}

std::string VerifyModeName(VerifyMode mode) {
  return mode == VerifyMode::kExact ? "exact" : "mc";
}

bool SupportsExact(const EstimatorKind& kind, const VIProblem& problem) {
  switch (kind.variant) {
    case EstimatorVariant::kNoisy:
    case EstimatorVariant::kPast:
      return false;
    case EstimatorVariant::kLocal:
      return problem.mixing() != nullptr;
    default:
      break;
  }
  Estimator probe(kind, problem);
  RngStream rng(0, 0);
  const Vector z = problem.prox().Center();
  probe.Initialize(z, rng);
  return probe.EnumerateHalf(z).has_value();
}

VerificationReport VerifyUnbiasedness(const EstimatorKind& kind,
                                      const VIProblem& problem,
                                      const std::vector<EstimatorState>& states,
                                      std::int64_t draws, std::uint64_t seed) {
  if (draws < 1) throw ParameterError("verification: draws must be >= 1");
  VerificationReport report;
  const double n = static_cast<double>(draws);
  for (std::size_t s = 0; s < states.size(); ++s) {
    CheckState(problem, states[s]);
    RngStream rng(DeriveSeed(seed, s), 0);
    Estimator est(kind, problem);
    est.Initialize(states[s].anchor, rng);
    const Vector target = problem.EvalFull(states[s].z_half);
    const Index d = target.size();
    Vector mean = Vector::Zero(d);
    Vector m2 = Vector::Zero(d);
    CostLedger ledger;
    for (std::int64_t t = 1; t <= draws; ++t) {
      const Vector g = est.SampleHalf(states[s].z_half, rng, ledger);
      const Vector delta = g - mean;
      mean += delta / static_cast<double>(t);
      m2 += delta.cwiseProduct(g - mean);
    }
    double worst = 0.0;
    for (Index i = 0; i < d; ++i) {
      const double variance = draws > 1 ? m2(i) / (n - 1.0) : 0.0;
      const double se = std::sqrt(std::max(variance, 0.0) / n);
      const double tol = 4.0 * se + kAbsoluteSlack * (1.0 + std::abs(target(i)));
      worst = std::max(worst, std::abs(mean(i) - target(i)) / tol);
    }
    VerificationRecord r;
    r.lemma = "eq10";
    r.variant = kind.name();
    r.lhs = worst;
    r.rhs = 1.0;
    r.slack = 1.0;
    r.n = draws;
    r.pass = worst <= 1.0;
    report.records.push_back(r);
  }
  return report;
}

VerificationReport VerifyAssumption2(const EstimatorKind& kind,
                                     const VIProblem& problem,
                                     const std::vector<EstimatorState>& states,
                                     VerifyMode mode, std::int64_t draws,
                                     std::uint64_t seed) {
  if (mode == VerifyMode::kExact && !SupportsExact(kind, problem)) {
    throw UnsupportedError("verification: exact mode unavailable for " +
                           kind.name());
  }
  if (mode == VerifyMode::kMonteCarlo && draws < 1) {
    throw ParameterError("verification: draws must be >= 1");
  }
  const AssumptionConstants c =
      ComputeAssumptionConstants(kind, ConstantInputsFor(kind, problem));
  const bool past = kind.variant == EstimatorVariant::kPast;
  VerificationReport report;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const EstimatorState& state = states[s];
    CheckState(problem, state);
    RngStream rng(DeriveSeed(seed, s), 1);
    Estimator est(kind, problem);
    est.Initialize(state.anchor, rng);
    const Vector target = problem.EvalFull(state.z_half);
    const double dist = (state.z_half - state.anchor).squaredNorm();
    const double sigma_sq =
        past ? (problem.EvalFull(state.anchor) - target).squaredNorm() : 0.0;

    double lhs_main = 0.0;
    double lhs_d3 = 0.0;
    double slack = 1.0;
    std::int64_t n = 1;
    if (mode == VerifyMode::kExact) {
      CostLedger ledger;
      const Vector lead = est.SampleLead(state.anchor, rng, ledger);
      const auto outcomes = est.EnumerateHalf(state.z_half);
      for (const auto& [p, value] : *outcomes) {
        lhs_main += p * (value - lead).squaredNorm();
        lhs_d3 += p * (value - target).squaredNorm();
      }
    } else {
      n = draws;
      slack = 1.0 + 5.0 / std::sqrt(static_cast<double>(draws));
      CostLedger ledger;
      for (std::int64_t t = 0; t < draws; ++t) {
        const Vector lead = est.SampleLead(state.anchor, rng, ledger);
        const Vector half = est.SampleHalf(state.z_half, rng, ledger);
        lhs_main += (half - lead).squaredNorm();
        lhs_d3 += (half - target).squaredNorm();
      }
      lhs_main /= static_cast<double>(draws);
      lhs_d3 /= static_cast<double>(draws);
    }
    const double rhs_main = c.a * dist + c.b * sigma_sq + c.d1;
    const double rhs_d3 = c.e * dist + c.d3;
    report.records.push_back(MakeRecord("eq11", kind, lhs_main, rhs_main, slack, n));
    report.records.push_back(MakeRecord("d3", kind, lhs_d3, rhs_d3, slack, n));
  }
  return report;
}

}  // namespace extrastep
