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

#include "extrastep/problems.h"

#include <cmath>

#include "Eigen/SVD"
#include "extrastep/errors.h"
#include "extrastep/rng.h"
#include "gtest/gtest.h"

namespace extrastep {
namespace {

Vector RandomVector(RngStream& rng, Index d) {
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = rng.Normal();
  return v;
}

Vector RandomSimplexPair(RngStream& rng, Index n) {
  Vector z(2 * n);
  for (Index i = 0; i < 2 * n; ++i) z(i) = -std::log(1.0 - rng.Uniform());
  z.head(n) /= z.head(n).sum();
  z.tail(n) /= z.tail(n).sum();
  return z;
}

TEST(WealthBaseTest, Examples) {
  const Vector w2 = WealthBase(2);
  EXPECT_DOUBLE_EQ(w2(3), 1.0);
  EXPECT_DOUBLE_EQ(w2(0), 0.0);
  const Vector w4 = WealthBase(4);
  EXPECT_DOUBLE_EQ(w4(2 * 4 + 2), 1.0);
  const Vector w5 = WealthBase(5);
  EXPECT_DOUBLE_EQ(w5(12), 1.0 - 0.4 * 0.5);
  EXPECT_THROW(WealthBase(0), ParameterError);
}

TEST(CellDistanceTest, Examples) {
  EXPECT_DOUBLE_EQ(CellDistance(4, 4, 3), 0.0);
  EXPECT_DOUBLE_EQ(CellDistance(0, 4, 3), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(CellDistance(0, 2, 3), 2.0);
  EXPECT_DOUBLE_EQ(CellDistance(1, 7, 3), CellDistance(7, 1, 3));
  EXPECT_THROW(CellDistance(0, 9, 3), ParameterError);
}

TEST(PoliceBurglarTest, ShapeAndEntries) {
  const VIProblem p = GeneratePoliceBurglar(4, 0.6, 3.0, 7);
  const BilinearGame* g = p.game();
  ASSERT_NE(g, nullptr);
  EXPECT_EQ(p.dimension(), 32);
  EXPECT_EQ(p.component_count(), 4);
  for (const auto& a : g->matrices) {
    EXPECT_GE(a.minCoeff(), 0.0);
    EXPECT_LE(a.maxCoeff(), 4.0);
    for (Index i = 0; i < a.rows(); ++i) EXPECT_EQ(a(i, i), 0.0);
  }
  EXPECT_EQ(p.constants().mu_f, 0.0);
  EXPECT_EQ(p.constants().component_lipschitz.size(), 4u);
}

TEST(PoliceBurglarTest, PaperScaleDimensions) {
  const VIProblem p = GeneratePoliceBurglar(25, 0.6, 3.0, 1);
  EXPECT_EQ(p.dimension(), 1250);
  EXPECT_EQ(p.component_count(), 25);
}

TEST(PoliceBurglarTest, Deterministic) {
  const VIProblem a = GeneratePoliceBurglar(3, 0.6, 3.0, 5);
  const VIProblem b = GeneratePoliceBurglar(3, 0.6, 3.0, 5);
  for (std::size_t k = 0; k < a.game()->matrices.size(); ++k) {
    EXPECT_EQ(a.game()->matrices[k], b.game()->matrices[k]);
  }
}

TEST(PoliceBurglarTest, NoWealthNoiseMakesComponentsEqual) {
  const VIProblem p = GeneratePoliceBurglar(3, 0.6, 0.0, 5);
  RngStream rng(1, 0);
  const Vector z = RandomSimplexPair(rng, 9);
  for (Index m = 0; m < 3; ++m) {
    EXPECT_LE((p.EvalComponent(m, z) - p.EvalFull(z)).norm(), 1e-14);
  }
}

TEST(PoliceBurglarTest, OperatorIsSkew) {
  const VIProblem p = GeneratePoliceBurglar(3, 0.6, 3.0, 2);
  RngStream rng(2, 0);
  for (int t = 0; t < 1000; ++t) {
    const Vector z1 = RandomSimplexPair(rng, 9);
    const Vector z2 = RandomSimplexPair(rng, 9);
    EXPECT_LE(std::abs((p.EvalFull(z1) - p.EvalFull(z2)).dot(z1 - z2)), 1e-12);
  }
}

TEST(PoliceBurglarTest, UniformPointGivesMeans) {
  const VIProblem p = GeneratePoliceBurglar(3, 0.6, 3.0, 3);
  const Vector z = p.prox().Center();
  const Vector f = p.EvalFull(z);
  const auto& a = p.game()->mean;
  for (Index i = 0; i < 9; ++i) {
    EXPECT_NEAR(f(i), a.col(i).mean(), 1e-14);
    EXPECT_NEAR(f(9 + i), -a.row(i).mean(), 1e-14);
  }
}

TEST(PoliceBurglarTest, ComponentsAverageToFull) {
  const VIProblem p = GeneratePoliceBurglar(3, 0.6, 3.0, 4);
  RngStream rng(4, 0);
  for (int t = 0; t < 100; ++t) {
    const Vector z = RandomVector(rng, 18);
    Vector sum = Vector::Zero(18);
    for (Index m = 0; m < 3; ++m) sum += p.EvalComponent(m, z);
    EXPECT_LE((sum / 3.0 - p.EvalFull(z)).norm(), 1e-10);
  }
  EXPECT_THROW(p.EvalComponent(3, Vector::Zero(18)), ParameterError);
  EXPECT_THROW(p.EvalFull(Vector::Zero(17)), DimensionError);
}

TEST(PoliceBurglarTest, LipschitzMatchesSvd) {
  const VIProblem p = GeneratePoliceBurglar(4, 0.6, 3.0, 6);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(p.game()->mean);
  EXPECT_NEAR(p.constants().lipschitz, svd.singularValues()(0),
              1e-6 * svd.singularValues()(0));
  for (Index m = 0; m < 4; ++m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> c(p.game()->matrices[m]);
    EXPECT_NEAR(p.constants().component_lipschitz[m], c.singularValues()(0),
                1e-6 * c.singularValues()(0));
  }
}

TEST(PoliceBurglarTest, CoordinatesMatchFull) {
  const VIProblem p = GeneratePoliceBurglar(3, 0.6, 3.0, 8);
  RngStream rng(8, 0);
  const Vector z = RandomVector(rng, 18);
  const Vector f = p.EvalFull(z);
  for (Index i = 0; i < 18; ++i) EXPECT_NEAR(p.EvalCoordinate(i, z), f(i), 1e-13);
}

TEST(QuadraticTest, SolutionAndConstants) {
  const VIProblem p = GenerateQuadratic(50, 0.1, 10.0, 3);
  ASSERT_TRUE(p.known_solution().has_value());
  EXPECT_LE(p.EvalFull(*p.known_solution()).norm(), 1e-8);
  EXPECT_NEAR(p.constants().lipschitz, 10.0, 1e-6);
  EXPECT_DOUBLE_EQ(p.constants().mu_f, 0.1);
  EXPECT_TRUE(p.prox().is_free());
}

TEST(QuadraticTest, StrongMonotonicityAndLipschitz) {
  const VIProblem p = GenerateQuadratic(20, 0.5, 4.0, 9);
  RngStream rng(9, 0);
  for (int t = 0; t < 1000; ++t) {
    const Vector z1 = RandomVector(rng, 20);
    const Vector z2 = RandomVector(rng, 20);
    const Vector df = p.EvalFull(z1) - p.EvalFull(z2);
    const double dz = (z1 - z2).squaredNorm();
    EXPECT_GE(df.dot(z1 - z2), 0.5 * dz * (1.0 - 1e-12));
    EXPECT_LE(df.norm(), 4.0 * std::sqrt(dz) * (1.0 + 1e-9));
  }
}

TEST(QuadraticTest, ScalarCase) {
  const VIProblem p = GenerateQuadratic(1, 2.0, 2.0, 1);
  const double zs = (*p.known_solution())(0);
  Vector z(1);
  z << zs + 3.0;
  EXPECT_NEAR(p.EvalFull(z)(0), 6.0, 1e-12);
}

TEST(QuadraticTest, RejectsMuAboveL) {
  EXPECT_THROW(GenerateQuadratic(5, 2.0, 1.0, 1), ParameterError);
}

TEST(MixingTest, ConsensusAnnihilatesConsensusStates) {
  ProblemSpec spec;
  spec.kind = ProblemKind::kMixing;
  spec.dimension = 5;
  spec.workers = 3;
  spec.lambda = 2.0;
  const VIProblem p = MakeProblem(spec);
  const MixingVI* mix = p.mixing();
  ASSERT_NE(mix, nullptr);
  RngStream rng(1, 0);
  const Vector block = RandomVector(rng, 5);
  const Vector z = block.replicate(3, 1);
  EXPECT_LE(mix->ConsensusPart(z).norm(), 1e-12);
}

TEST(MixingTest, ConsensusIsIdempotentProjection) {
  ProblemSpec spec;
  spec.kind = ProblemKind::kMixing;
  spec.dimension = 4;
  spec.workers = 3;
  spec.lambda = 1.0;
  const VIProblem p = MakeProblem(spec);
  RngStream rng(2, 0);
  const Vector z = RandomVector(rng, 12);
  const Vector once = p.mixing()->ConsensusPart(z);
  EXPECT_LE((p.mixing()->ConsensusPart(once) - once).norm(), 1e-12);
}

TEST(MixingTest, SingleWorkerIsLocalOperator) {
  ProblemSpec spec;
  spec.kind = ProblemKind::kMixing;
  spec.dimension = 4;
  spec.workers = 1;
  const VIProblem p = MakeProblem(spec);
  RngStream rng(3, 0);
  const Vector z = RandomVector(rng, 4);
  EXPECT_LE((p.EvalFull(z) - p.mixing()->LocalPart(z)).norm(), 1e-12);
}

TEST(MixingTest, SolutionAndCoordinates) {
  ProblemSpec spec;
  spec.kind = ProblemKind::kMixing;
  spec.dimension = 6;
  spec.workers = 3;
  spec.lambda = 0.5;
  const VIProblem p = MakeProblem(spec);
  ASSERT_TRUE(p.known_solution().has_value());
  EXPECT_LE(p.EvalFull(*p.known_solution()).norm(), 1e-8);
  EXPECT_DOUBLE_EQ(p.constants().lambda, 0.5);
  RngStream rng(4, 0);
  const Vector z = RandomVector(rng, 18);
  const Vector f = p.EvalFull(z);
  for (Index i = 0; i < 18; ++i) EXPECT_NEAR(p.EvalCoordinate(i, z), f(i), 1e-12);
}

TEST(MixingTest, RejectsMismatchedWorkers) {
  std::vector<VIProblem> base = {GenerateQuadratic(3, 1.0, 2.0, 1),
                                 GenerateQuadratic(4, 1.0, 2.0, 2)};
  EXPECT_THROW(GenerateMixing(base, 1.0), DimensionError);
}

TEST(EstimateLipschitzTest, ZeroOperator) {
  VIProblem p(AffineOperator{Eigen::MatrixXd::Zero(3, 3), Vector::Zero(3)},
              ProxSpec::Free(3), ProblemConstants{}, std::nullopt);
  EXPECT_EQ(EstimateLipschitz(p, 1e-6), 0.0);
}

TEST(EstimateLipschitzTest, QuadraticTarget) {
  const VIProblem p = GenerateQuadratic(30, 0.2, 10.0, 5);
  const double estimate = EstimateLipschitz(p, 1e-12);
  EXPECT_NEAR(estimate, 10.0, 1e-3);
  EXPECT_LE(estimate, 10.0 + 1e-9);
  EXPECT_LE(EstimateLipschitz(p, 1e-3), estimate + 1e-9);
}

TEST(ProblemKindTest, NamesRoundTrip) {
  for (auto k : {ProblemKind::kPoliceBurglar, ProblemKind::kQuadratic, ProblemKind::kMixing}) {
    EXPECT_EQ(ParseProblemKind(ProblemKindName(k)), k);
  }
  EXPECT_FALSE(ParseProblemKind("bogus").has_value());
}

}  // namespace
}  // namespace extrastep
