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

#include <cmath>

#include "extrastep/errors.h"
#include "extrastep/quantizer.h"
#include "gtest/gtest.h"

namespace extrastep {
namespace {

std::vector<VerificationRecord> Filter(const VerificationReport& r,
                                       const std::string& lemma) {
  std::vector<VerificationRecord> out;
  for (const auto& rec : r.records) {
    if (rec.lemma == lemma) out.push_back(rec);
  }
  return out;
}

TEST(RandomStatesTest, FeasibleAndDeterministic) {
  const VIProblem p = GeneratePoliceBurglar(3, 0.6, 3.0, 1);
  const auto a = RandomStates(p, 7, 3);
  const auto b = RandomStates(p, 7, 3);
  ASSERT_EQ(a.size(), 7u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(p.prox().IsFeasible(a[i].anchor, 1e-12));
    EXPECT_TRUE(p.prox().IsFeasible(a[i].z_half, 1e-12));
    EXPECT_EQ(a[i].anchor, b[i].anchor);
    EXPECT_NE(a[i].anchor, a[i].z_half);
  }
}

TEST(VerifyAssumption2Test, CoordExactMatchesClosedForm) {
  const VIProblem p = GeneratePoliceBurglar(3, 0.6, 3.0, 1);
  const auto states = RandomStates(p, 20, 5);
  const VerificationReport r =
      VerifyAssumption2(EstimatorKind::Coord(), p, states, VerifyMode::kExact, 0, 1);
  EXPECT_TRUE(r.all_pass());
  const auto main = Filter(r, "eq11");
  const auto d3 = Filter(r, "d3");
  ASSERT_EQ(main.size(), 20u);
  ASSERT_EQ(d3.size(), 20u);
  const double d = static_cast<double>(p.dimension());
  for (std::size_t s = 0; s < states.size(); ++s) {
    const double delta =
        (p.EvalFull(states[s].z_half) - p.EvalFull(states[s].anchor)).squaredNorm();
    EXPECT_NEAR(main[s].lhs, d * delta, 1e-10 * (1.0 + d * delta));
    EXPECT_NEAR(d3[s].lhs, (d - 1.0) * delta, 1e-10 * (1.0 + d * delta));
    EXPECT_EQ(main[s].slack, 1.0);
  }
}

TEST(VerifyAssumption2Test, RandKExactForAllKeeps) {
  const VIProblem p = GenerateQuadratic(6, 0.5, 3.0, 2);
  const auto states = RandomStates(p, 10, 9);
  for (Index keep : {1, 2, 3}) {
    for (const EstimatorKind& kind :
         {EstimatorKind::Quant(Quantizer::RandK(keep, 6)),
          EstimatorKind::QVR(Quantizer::RandK(keep, 6))}) {
      ASSERT_TRUE(SupportsExact(kind, p));
      const auto r = VerifyAssumption2(kind, p, states, VerifyMode::kExact, 0, 1);
      EXPECT_TRUE(r.all_pass()) << kind.name() << " keep=" << keep;
    }
  }
}

TEST(VerifyAssumption2Test, QuantExactMatchesOmegaIdentity) {
  const VIProblem p = GenerateQuadratic(6, 0.5, 3.0, 2);
  const auto states = RandomStates(p, 4, 1);
  const Quantizer q = Quantizer::RandK(2, 6);
  const auto r =
      VerifyAssumption2(EstimatorKind::Quant(q), p, states, VerifyMode::kExact, 0, 1);
  const auto d3 = Filter(r, "d3");
  for (std::size_t s = 0; s < states.size(); ++s) {
    const double delta =
        (p.EvalFull(states[s].z_half) - p.EvalFull(states[s].anchor)).squaredNorm();
    EXPECT_NEAR(d3[s].lhs, (q.omega() - 1.0) * delta, 1e-10 * (1.0 + delta));
  }
}

TEST(VerifyAssumption2Test, MonteCarloSnapshotVariantsPass) {
  const VIProblem p = GeneratePoliceBurglar(3, 0.6, 3.0, 1);
  const auto states = RandomStates(p, 3, 2);
  for (const EstimatorKind& kind : {EstimatorKind::VR(), EstimatorKind::IS(),
                                    EstimatorKind::QVR(Quantizer::RandK(3, 18))}) {
    const auto r = VerifyAssumption2(kind, p, states, VerifyMode::kMonteCarlo, 20000, 4);
    EXPECT_TRUE(r.all_pass()) << kind.name();
    EXPECT_DOUBLE_EQ(r.records.front().slack, 1.0 + 5.0 / std::sqrt(20000.0));
  }
}

TEST(VerifyAssumption2Test, NoisyAndPastMonteCarlo) {
  const VIProblem p = GenerateQuadratic(8, 0.5, 2.0, 3);
  const auto states = RandomStates(p, 3, 6);
  for (const EstimatorKind& kind : {EstimatorKind::Noisy(1.0), EstimatorKind::Past(1.0)}) {
    EXPECT_FALSE(SupportsExact(kind, p));
    EXPECT_THROW(VerifyAssumption2(kind, p, states, VerifyMode::kExact, 0, 1),
                 UnsupportedError);
    const auto r = VerifyAssumption2(kind, p, states, VerifyMode::kMonteCarlo, 20000, 2);
    EXPECT_TRUE(r.all_pass()) << kind.name();
  }
}

TEST(VerifyAssumption2Test, LocalExactOnMixing) {
  const VIProblem base = GenerateQuadratic(3, 0.5, 2.0, 1);
  const VIProblem p = GenerateMixing({base, GenerateQuadratic(3, 0.5, 2.0, 2)}, 1.0);
  const double l = p.constants().local_lipschitz;
  const EstimatorKind kind = EstimatorKind::Local(l / (l + 1.0));
  ASSERT_TRUE(SupportsExact(kind, p));
  const auto r = VerifyAssumption2(kind, p, RandomStates(p, 10, 1), VerifyMode::kExact, 0, 1);
  EXPECT_TRUE(r.all_pass());
}

TEST(VerifyUnbiasednessTest, RandomizedVariantsPass) {
  const VIProblem p = GeneratePoliceBurglar(3, 0.6, 3.0, 1);
  const auto states = RandomStates(p, 2, 8);
  for (const EstimatorKind& kind :
       {EstimatorKind::Noisy(0.5), EstimatorKind::VR(), EstimatorKind::Coord(),
        EstimatorKind::IS(), EstimatorKind::Quant(Quantizer::RandK(4, 18))}) {
    const auto r = VerifyUnbiasedness(kind, p, states, 20000, 3);
    EXPECT_TRUE(r.all_pass()) << kind.name();
    EXPECT_EQ(r.records.size(), 2u);
  }
}

TEST(VerifyUnbiasednessTest, FullDetIsExact) {
  const VIProblem p = GeneratePoliceBurglar(3, 0.6, 3.0, 1);
  const auto r = VerifyUnbiasedness(EstimatorKind::FullDet(), p, RandomStates(p, 3, 1), 10, 1);
  EXPECT_TRUE(r.all_pass());
  for (const auto& rec : r.records) EXPECT_EQ(rec.lhs, 0.0);
}

TEST(VerifyUnbiasednessTest, MisscaledCoordFails) {
  const VIProblem p = GeneratePoliceBurglar(3, 0.6, 3.0, 1);
  EstimatorKind bad = EstimatorKind::Coord();
  bad.coord_scale = 0.5;
  const auto r = VerifyUnbiasedness(bad, p, RandomStates(p, 2, 8), 20000, 3);
  EXPECT_FALSE(r.all_pass());
  EXPECT_EQ(r.records.front().variant, "coord_misscaled");
}

TEST(VerificationReportTest, CsvLayout) {
  VerificationReport r;
  r.records.push_back({"eq11", "vr", 1.5, 2.0, 1.0, 10, true});
  VerificationReport other;
  other.records.push_back({"d3", "vr", 3.0, 2.0, 1.0, 10, false});
  r.Append(other);
  EXPECT_FALSE(r.all_pass());
  EXPECT_EQ(r.ToCsv(),
            "lemma,variant,lhs,rhs,slack,n,pass\n"
            "eq11,vr,1.5,2,1,10,true\n"
            "d3,vr,3,2,1,10,false\n");
}

TEST(VerifyModeTest, Names) {
  EXPECT_EQ(VerifyModeName(VerifyMode::kExact), "exact");
  EXPECT_EQ(VerifyModeName(VerifyMode::kMonteCarlo), "mc");
}

}  // namespace
}  // namespace extrastep
