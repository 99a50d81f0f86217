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

#include "extrastep/quantizer.h"

#include <cmath>
#include <set>

#include "extrastep/errors.h"
#include "gtest/gtest.h"

namespace extrastep {
namespace {

Vector Ramp(Index d) {
  Vector x(d);
  for (Index i = 0; i < d; ++i) x(i) = 1.0 + static_cast<double>(i);
  return x;
}

TEST(QuantizerTest, IdentityPassesThrough) {
  const Quantizer q = Quantizer::Identity(4);
  RngStream rng(1, 0);
  const Vector x = Ramp(4);
  EXPECT_EQ(q.Apply(x, rng), x);
  EXPECT_DOUBLE_EQ(q.omega(), 1.0);
  EXPECT_EQ(q.BitsPerMessage(), 256u);
}

TEST(QuantizerTest, RandKKeepsExactlyK) {
  const Quantizer q = Quantizer::RandK(2, 6);
  RngStream rng(2, 0);
  const Vector x = Ramp(6);
  for (int t = 0; t < 100; ++t) {
    const Vector y = q.Apply(x, rng);
    int nonzero = 0;
    for (Index i = 0; i < 6; ++i) {
      if (y(i) != 0.0) {
        ++nonzero;
        EXPECT_DOUBLE_EQ(y(i), 3.0 * x(i));
      }
    }
    EXPECT_EQ(nonzero, 2);
  }
  EXPECT_DOUBLE_EQ(q.omega(), 3.0);
  // 2 values, 64 bits each plus 3 index bits.
  EXPECT_EQ(q.BitsPerMessage(), 134u);
}

TEST(QuantizerTest, SupportsEnumerateCombinations) {
  const Quantizer q = Quantizer::RandK(2, 6);
  const auto supports = q.AllSupports();
  EXPECT_EQ(supports.size(), 15u);
  std::set<std::vector<Index>> unique(supports.begin(), supports.end());
  EXPECT_EQ(unique.size(), 15u);
}

TEST(QuantizerTest, ExactMomentsOverSupports) {
  const Vector x = Ramp(6);
  for (Index k = 1; k <= 6; ++k) {
    const Quantizer q = Quantizer::RandK(k, 6);
    const auto supports = q.AllSupports();
    Vector mean = Vector::Zero(6);
    double second = 0.0;
    for (const auto& s : supports) {
      const Vector y = q.ApplyWithSupport(x, s);
      mean += y;
      second += y.squaredNorm();
    }
    mean /= static_cast<double>(supports.size());
    second /= static_cast<double>(supports.size());
    EXPECT_LE((mean - x).norm(), 1e-12);
    EXPECT_NEAR(second, q.omega() * x.squaredNorm(), 1e-9);
  }
}

TEST(QuantizerTest, MonteCarloUnbiased) {
  const Quantizer q = Quantizer::RandK(3, 8);
  RngStream rng(5, 0);
  const Vector x = Ramp(8);
  const int n = 40000;
  Vector mean = Vector::Zero(8);
  for (int t = 0; t < n; ++t) mean += q.Apply(x, rng);
  mean /= n;
  for (Index i = 0; i < 8; ++i) {
    // Var of one coordinate: x_i^2 (d/k - 1).
    const double se = std::abs(x(i)) * std::sqrt((8.0 / 3.0 - 1.0) / n);
    EXPECT_NEAR(mean(i), x(i), 4.0 * se);
  }
}

TEST(QuantizerTest, RejectsBadKeep) {
  EXPECT_THROW(Quantizer::RandK(0, 5), ParameterError);
  EXPECT_THROW(Quantizer::RandK(6, 5), ParameterError);
  RngStream rng(1, 0);
  EXPECT_THROW(Quantizer::RandK(1, 5).Apply(Vector::Zero(4), rng), DimensionError);
}

}  // namespace
}  // namespace extrastep
