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

#include "extrastep/prox.h"

#include <algorithm>
#include <limits>
#include <vector>

#include "extrastep/errors.h"
#include "extrastep/rng.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace extrastep {
namespace {

using ::testing::ElementsAre;

// Projection by enumerating every candidate support S: on S the KKT
// conditions give x_S = v_S - (sum(v_S) - 1) / |S|.
Vector ProjectByEnumeration(const Vector& v) {
  const Index d = v.size();
  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
    double sum = 0.0;
    int size = 0;
    for (Index i = 0; i < d; ++i) {
      if (mask & (1u << i)) {
        sum += v(i);
        ++size;
      }
    }
    const double shift = (sum - 1.0) / size;
    Vector x = Vector::Zero(d);
    bool feasible = true;
    for (Index i = 0; i < d; ++i) {
      if (mask & (1u << i)) {
        x(i) = v(i) - shift;
        if (x(i) < -1e-15) feasible = false;
      }
    }
    if (!feasible) continue;
    const double dist = (x - v).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

TEST(ProjectSimplexTest, KeepsFeasiblePoint) {
  Vector v(3);
  v << 0.2, 0.3, 0.5;
  EXPECT_TRUE(ProjectSimplex(v).isApprox(v, 1e-15));
}

TEST(ProjectSimplexTest, UniformShift) {
  Vector v(2);
  v << 2.0, 2.0;
  const Vector x = ProjectSimplex(v);
  EXPECT_NEAR(x(0), 0.5, 1e-15);
  EXPECT_NEAR(x(1), 0.5, 1e-15);
}

TEST(ProjectSimplexTest, ClipsToVertex) {
  Vector v(3);
  v << 5.0, 0.0, -1.0;
  const Vector x = ProjectSimplex(v);
  EXPECT_THAT(std::vector<double>(x.data(), x.data() + 3), ElementsAre(1.0, 0.0, 0.0));
}

TEST(ProjectSimplexTest, EmptyInputThrows) {
  EXPECT_THROW(ProjectSimplex(Vector()), DimensionError);
}

TEST(ProjectSimplexTest, MatchesEnumerationOracle) {
  RngStream rng(11, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const Index d = static_cast<Index>(rng.UniformInt(1, 6));
    Vector v(d);
    for (Index i = 0; i < d; ++i) v(i) = 3.0 * rng.Normal();
    const Vector x = ProjectSimplex(v);
    const Vector oracle = ProjectByEnumeration(v);
    EXPECT_LE((x - oracle).lpNorm<Eigen::Infinity>(), 1e-10) << "trial " << trial;
    EXPECT_NEAR(x.sum(), 1.0, 1e-12);
    EXPECT_GE(x.minCoeff(), 0.0);
  }
}

TEST(ProjectSimplexTest, Idempotent) {
  RngStream rng(12, 0);
  for (int trial = 0; trial < 100; ++trial) {
    Vector v(8);
    for (Index i = 0; i < 8; ++i) v(i) = rng.Normal();
    const Vector x = ProjectSimplex(v);
    EXPECT_LE((ProjectSimplex(x) - x).lpNorm<Eigen::Infinity>(), 1e-14);
  }
}

TEST(ProxSpecTest, FreeIsIdentity) {
  const ProxSpec prox = ProxSpec::Free(3);
  Vector v(3);
  v << -1.0, 2.0, 7.5;
  EXPECT_EQ(prox.Apply(0.1, v), v);
  EXPECT_TRUE(prox.is_free());
  EXPECT_EQ(prox.Center(), Vector::Zero(3));
}

TEST(ProxSpecTest, ProductProjectsEachBlock) {
  const ProxSpec prox = ProxSpec::ProductOfSimplices({2, 3});
  Vector v(5);
  v << 3.0, 1.0, 0.0, 0.0, 0.0;
  const Vector x = prox.Apply(1.0, v);
  EXPECT_NEAR(x(0), 1.0, 1e-15);
  EXPECT_NEAR(x(1), 0.0, 1e-15);
  for (Index i = 2; i < 5; ++i) EXPECT_NEAR(x(i), 1.0 / 3.0, 1e-15);
  EXPECT_TRUE(prox.IsFeasible(x, 1e-12));
  EXPECT_FALSE(prox.IsFeasible(v, 1e-12));
}

TEST(ProxSpecTest, CenterIsFeasible) {
  const ProxSpec prox = ProxSpec::ProductOfSimplices({4, 4});
  const Vector c = prox.Center();
  EXPECT_TRUE(prox.IsFeasible(c, 1e-15));
  EXPECT_DOUBLE_EQ(c(0), 0.25);
}

TEST(ProxSpecTest, RejectsBadArguments) {
  const ProxSpec prox = ProxSpec::ProductOfSimplices({2, 2});
  EXPECT_THROW(prox.Apply(0.0, Vector::Zero(4)), ParameterError);
  EXPECT_THROW(prox.Apply(1.0, Vector::Zero(3)), DimensionError);
  EXPECT_THROW(ProxSpec::ProductOfSimplices({2, 0}), DimensionError);
}

}  // namespace
}  // namespace extrastep
