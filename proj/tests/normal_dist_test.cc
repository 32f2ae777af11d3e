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

#include "fedtab/normal_dist.h"

#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "gtest/gtest.h"

namespace fedtab {
namespace {

double ReferenceQuantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

TEST(NormalQuantileTest, MatchesReferenceAcrossCentralAndTailRegions) {
  for (double p = 1e-300; p < 0.5; p *= 7.3) {
    for (double q : {p, 1.0 - p}) {
      if (q <= 0.0 || q >= 1.0) continue;
      const double want = ReferenceQuantile(q);
      EXPECT_NEAR(NormalQuantile(q), want, 1e-9 * std::max(1.0, std::abs(want)))
          << "p=" << q;
    }
  }
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    const double want = ReferenceQuantile(p);
    EXPECT_NEAR(NormalQuantile(p), want, 1e-9 * std::max(1.0, std::abs(want)))
        << "p=" << p;
  }
}

TEST(NormalQuantileTest, KnownValues) {
  EXPECT_NEAR(NormalQuantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_EQ(NormalQuantile(0.5), 0.0);
  EXPECT_NEAR(NormalQuantile(1e-4), -3.719016485455709, 1e-12);
}

TEST(NormalQuantileTest, EdgesAndInvalidInput) {
  EXPECT_EQ(NormalQuantile(0.0), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(NormalQuantile(1.0), std::numeric_limits<double>::infinity());
  EXPECT_TRUE(std::isnan(NormalQuantile(-0.1)));
  EXPECT_TRUE(std::isnan(NormalQuantile(1.1)));
  EXPECT_TRUE(std::isnan(NormalQuantile(std::nan(""))));
}

TEST(NormalCdfTest, InvertsQuantile) {
  for (double p : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999}) {
    EXPECT_NEAR(NormalCdf(NormalQuantile(p)), p, 1e-14 + 1e-12 * p);
  }
  EXPECT_NEAR(NormalCdf(0.0), 0.5, 1e-16);
}

}  // namespace
}  // namespace fedtab
