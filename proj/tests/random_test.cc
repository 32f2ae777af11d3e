// Copyright 2026 The Fedtab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fedtab/random.h"

#include <cmath>
#include <set>
#include <vector>

#include "gtest/gtest.h"

namespace fedtab {
namespace {

TEST(MixSeedTest, DistinctIndicesGiveDistinctSeeds) {
  std::set<uint64_t> seen;
  for (uint64_t i = 0; i < 1000; ++i) seen.insert(MixSeed(42, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(MixSeed(1, 0), MixSeed(0, 1));
  EXPECT_EQ(MixSeed(7, 3), MixSeed(7, 3));
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.Uniform(), b.Uniform());
    EXPECT_EQ(a.Normal(), b.Normal());
  }
}

TEST(RngTest, UniformRanges) {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.Uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const double o = rng.UniformOpen();
    EXPECT_GT(o, 0.0);
    EXPECT_LT(o, 1.0);
    EXPECT_LT(rng.UniformInt(7), 7u);
  }
}

TEST(RngTest, NormalMoments) {
  Rng rng(11);
  const int n = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.Normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sq / n - mean * mean, 1.0, 0.015);
}

TEST(RngTest, LogGammaMeanMatchesShape) {
  for (double shape : {0.05, 0.5, 3.0}) {
    Rng rng(17);
    const int n = 100000;
    double sum = 0;
    for (int i = 0; i < n; ++i) {
      const double lg = rng.LogGamma(shape);
      ASSERT_TRUE(std::isfinite(lg)) << shape;
      sum += std::exp(lg);
    }
    EXPECT_NEAR(sum / n, shape, 0.03 * std::max(shape, 0.2)) << shape;
  }
}

}  // namespace
}  // namespace fedtab
