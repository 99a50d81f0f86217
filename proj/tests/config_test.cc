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

#include <cmath>

#include "extrastep/errors.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace extrastep {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

constexpr char kMinimal[] =
    "# minimal run\n"
    "problem.kind = pvb\n"
    "problem.n = 5\n"
    "solver.estimator = fulldet\n"
    "solver.K = 100\n";

TEST(ParseConfigTest, MinimalPoliceBurglar) {
  const Config c = ParseConfig(kMinimal);
  EXPECT_EQ(c.problem.kind, ProblemKind::kPoliceBurglar);
  EXPECT_EQ(c.problem.side, 5);
  EXPECT_THAT(c.estimators, ElementsAre(EstimatorVariant::kFullDet));
  EXPECT_EQ(c.iterations, 100);
  EXPECT_FALSE(c.gamma.has_value());
  EXPECT_FALSE(c.tau.has_value());
  EXPECT_THAT(c.seeds, ElementsAre(1u));
}

TEST(ParseConfigTest, MisspelledKeyNamesLine) {
  try {
    ParseConfig(std::string(kMinimal) + "solver.gama = 0.1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    ASSERT_EQ(e.messages().size(), 1u);
    EXPECT_THAT(e.messages()[0], HasSubstr("line 6"));
    EXPECT_THAT(e.messages()[0], HasSubstr("solver.gama"));
  }
}

TEST(ParseConfigTest, CollectsEveryError) {
  const std::string text =
      "problem.kind = pvb\n"
      "problem.kind = quadratic\n"
      "solver.estimator = nope\n"
      "garbage line\n"
      "solver.K = 10\n";
  try {
    ParseConfig(text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    ASSERT_EQ(e.messages().size(), 3u);
    EXPECT_THAT(e.messages()[0], HasSubstr("line 2: duplicate"));
    EXPECT_THAT(e.messages()[1], HasSubstr("line 3"));
    EXPECT_THAT(e.messages()[2], HasSubstr("line 4"));
  }
}

TEST(ParseConfigTest, RequiredKeys) {
  EXPECT_THROW(ParseConfig("problem.kind = pvb\nsolver.K = 5\n"), ConfigError);
  EXPECT_NO_THROW(ParseConfig("problem.kind = pvb\n", {}, false));
  EXPECT_NO_THROW(
      ParseConfig("problem.kind = pvb\nsolver.K = 5\n", {"solver.estimator=vr"}));
}

TEST(ParseConfigTest, RangeChecks) {
  for (const char* bad : {"problem.n = 0", "problem.theta = -1", "solver.K = 0",
                          "solver.tau = 1", "solver.gamma = -0.5", "problem.d = 0",
                          "solver.sigma = -1", "verify.draws = 0", "problem.n = x"}) {
    EXPECT_THROW(ParseConfig(std::string(kMinimal) + bad + "\n"), ConfigError) << bad;
  }
}

TEST(ParseConfigTest, ListsRangesAndAutos) {
  const Config c = ParseConfig(
      "problem.kind = quadratic\n"
      "solver.estimator = [vr, coord, quant]\n"
      "solver.gamma_multiplier = 0.5, 1, 2\n"
      "solver.seed = 1..3, 7\n"
      "solver.gamma = auto\n"
      "solver.tau = 0.25\n"
      "solver.K = 50  # trailing comment\n"
      "solver.weights = 0.25, 0.75\n"
      "verify.variants = default\n");
  EXPECT_THAT(c.estimators, ElementsAre(EstimatorVariant::kVR, EstimatorVariant::kCoord,
                                        EstimatorVariant::kQuant));
  EXPECT_THAT(c.gamma_multipliers, ElementsAre(0.5, 1.0, 2.0));
  EXPECT_THAT(c.seeds, ElementsAre(1u, 2u, 3u, 7u));
  EXPECT_FALSE(c.gamma.has_value());
  EXPECT_EQ(c.tau, 0.25);
  EXPECT_EQ(c.iterations, 50);
  EXPECT_THAT(*c.weights, ElementsAre(0.25, 0.75));
  EXPECT_TRUE(c.verify_variants.empty());
}

TEST(ParseConfigTest, OverridesReplaceValues) {
  const Config c = ParseConfig(kMinimal, {"solver.K=7", "problem.n = 3"});
  EXPECT_EQ(c.iterations, 7);
  EXPECT_EQ(c.problem.side, 3);
  try {
    ParseConfig(kMinimal, {"solver.bogus=1"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_THAT(e.messages()[0], HasSubstr("override 1"));
  }
}

TEST(RenderConfigTest, RoundTrip) {
  Config c = ParseConfig(kMinimal);
  EXPECT_EQ(ParseConfig(RenderConfig(c)), c);
  c.problem.kind = ProblemKind::kMixing;
  c.problem.theta = 0.1 + 0.2;
  c.problem.mu = 1.0 / 3.0;
  c.estimators = {EstimatorVariant::kLocal, EstimatorVariant::kQVR};
  c.quantizer = QuantizerKind::kIdentity;
  c.keep = 3;
  c.weights = std::vector<double>{0.1, 0.9};
  c.split = 0.7;
  c.gamma = 1e-3 / 7.0;
  c.gamma_multipliers = {0.25, 4.0};
  c.tau = 0.9;
  c.lyapunov_weight = 36.0;
  c.regime = Regime::kMonotone;
  c.averaging = false;
  c.seeds = {4, 5, 9};
  c.stride = 10;
  c.trace_path = "out/t.csv";
  c.axis = "bits";
  c.verify_variants = {EstimatorVariant::kCoord};
  c.verify_mode = VerifyMode::kMonteCarlo;
  c.negative_control = false;
  EXPECT_EQ(ParseConfig(RenderConfig(c)), c);
}

TEST(ExpandSweepTest, CrossProduct) {
  Config c = ParseConfig(kMinimal);
  c.estimators = {EstimatorVariant::kFullDet, EstimatorVariant::kPast};
  c.seeds = {1, 2, 3};
  c.gamma_multipliers = {0.5, 1.0};
  const auto runs = ExpandSweep(c);
  ASSERT_EQ(runs.size(), 12u);
  for (const auto& r : runs) {
    EXPECT_EQ(r.estimators.size(), 1u);
    EXPECT_EQ(r.seeds.size(), 1u);
    EXPECT_EQ(r.gamma_multipliers.size(), 1u);
  }
  EXPECT_EQ(runs.back().estimators[0], EstimatorVariant::kPast);
  EXPECT_EQ(runs.back().seeds[0], 3u);
  c.seeds.clear();
  EXPECT_THROW(ExpandSweep(c), ConfigError);
}

TEST(ResolveTest, CoordAutoStepSize) {
  Config c = ParseConfig(
      "problem.kind = pvb\nproblem.n = 3\nsolver.estimator = coord\nsolver.K = 10\n");
  const VIProblem p = MakeProblem(c.problem);
  const RunPlan plan = Resolve(c, p);
  const double d = 18.0;
  const double l = p.constants().lipschitz;
  EXPECT_EQ(*plan.config.regime, Regime::kMonotone);
  EXPECT_DOUBLE_EQ(plan.solver.tau, d / (d + 1.0));
  EXPECT_NEAR(plan.solver.gamma,
              std::sqrt(1.0 / (d + 1.0)) / (2.0 * l * std::sqrt(4.0 * d + 2.0)), 1e-15);
  EXPECT_EQ(plan.solver.trace_stride, 1);
  EXPECT_EQ(ParseConfig(RenderConfig(plan.config)), plan.config);
}

TEST(ResolveTest, MultiplierScalesAutoGammaOnly) {
  Config c = ParseConfig(kMinimal);
  const VIProblem p = MakeProblem(c.problem);
  c.gamma_multipliers = {0.5};
  const double half = Resolve(c, p).solver.gamma;
  c.gamma_multipliers = {1.0};
  EXPECT_DOUBLE_EQ(Resolve(c, p).solver.gamma, 2.0 * half);
  c.gamma = 0.01;
  c.gamma_multipliers = {0.5};
  EXPECT_DOUBLE_EQ(Resolve(c, p).solver.gamma, 0.01);
}

TEST(ResolveTest, QuadraticStronglyMonotoneAndKeep) {
  Config c = ParseConfig(
      "problem.kind = quadratic\nsolver.estimator = quant\nsolver.K = 20000\n");
  const VIProblem p = MakeProblem(c.problem);
  const RunPlan plan = Resolve(c, p);
  EXPECT_EQ(*plan.config.regime, Regime::kStronglyMonotone);
  EXPECT_EQ(*plan.config.keep, 10);
  EXPECT_DOUBLE_EQ(plan.solver.tau, 5.0 / 6.0);
  EXPECT_EQ(plan.solver.trace_stride, 2);
}

TEST(ResolveTest, LocalNeedsMixingAndSplitsAtTau) {
  Config c = ParseConfig(kMinimal, {"solver.estimator=local"});
  EXPECT_THROW(Resolve(c, MakeProblem(c.problem)), ConfigError);
  c.problem.kind = ProblemKind::kMixing;
  const VIProblem p = MakeProblem(c.problem);
  const RunPlan plan = Resolve(c, p);
  const double l = p.constants().local_lipschitz;
  const double lambda = p.constants().lambda;
  EXPECT_DOUBLE_EQ(*plan.config.split, l / (l + lambda));
  EXPECT_DOUBLE_EQ(plan.solver.tau, l / (l + lambda));
}

TEST(ResolveTest, RejectsMultiValuedConfig) {
  Config c = ParseConfig(kMinimal);
  c.seeds = {1, 2};
  EXPECT_THROW(Resolve(c, MakeProblem(c.problem)), ConfigError);
}

TEST(DefaultAxisTest, PerVariant) {
  EXPECT_EQ(DefaultAxis(EstimatorVariant::kCoord), "coords");
  EXPECT_EQ(DefaultAxis(EstimatorVariant::kQVR), "bits");
  EXPECT_EQ(DefaultAxis(EstimatorVariant::kIS), "comp_calls");
  EXPECT_EQ(DefaultAxis(EstimatorVariant::kLocal), "comms");
  EXPECT_EQ(DefaultAxis(EstimatorVariant::kPast), "full_calls");
}

}  // namespace
}  // namespace extrastep
