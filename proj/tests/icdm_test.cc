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

#include "fedtab/icdm.h"

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "fedtab/random.h"
#include "gtest/gtest.h"

namespace fedtab {
namespace {

constexpr double kLambda = IcdmCodec::kDefaultLambda;

double Quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

IcdmCodec ThreeCategories() {
  auto codec = IcdmCodec::Build({{"d3", 0.5}, {"d1", 0.2}, {"d2", 0.3}});
  EXPECT_TRUE(codec.ok()) << codec.status();
  return *std::move(codec);
}

TEST(IcdmBuildTest, IntervalsFollowAscendingFrequency) {
  IcdmCodec codec = ThreeCategories();
  const auto& e = codec.entries();
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0].category, "d1");
  EXPECT_EQ(e[1].category, "d2");
  EXPECT_EQ(e[2].category, "d3");
  // [lambda, p1], [p1, p1 + p2], [p1 + p2, 1 - lambda], inner boundaries
  // within lambda of the raw cumulative frequencies.
  EXPECT_DOUBLE_EQ(e[0].q_low, kLambda);
  EXPECT_NEAR(e[0].q_high, 0.2, kLambda);
  EXPECT_EQ(e[1].q_low, e[0].q_high);
  EXPECT_NEAR(e[1].q_high, 0.5, kLambda);
  EXPECT_EQ(e[2].q_low, e[1].q_high);
  EXPECT_DOUBLE_EQ(e[2].q_high, 1.0 - kLambda);
}

TEST(IcdmBuildTest, SingleCategoryAndMedianBoundary) {
  auto single = IcdmCodec::Build({{"only", 1.0}});
  ASSERT_TRUE(single.ok());
  EXPECT_DOUBLE_EQ(single->entries()[0].q_low, kLambda);
  EXPECT_DOUBLE_EQ(single->entries()[0].q_high, 1.0 - kLambda);

  auto halves = IcdmCodec::Build({{"A", 0.5}, {"B", 0.5}});
  ASSERT_TRUE(halves.ok());
  EXPECT_DOUBLE_EQ(halves->entries()[0].q_high, 0.5);
  EXPECT_NEAR(halves->ValueHigh(0), 0.0, 1e-15);
}

TEST(IcdmBuildTest, Errors) {
  EXPECT_FALSE(IcdmCodec::Build({}).ok());
  EXPECT_FALSE(IcdmCodec::Build({{"a", 0.5}, {"a", 0.5}}).ok());
  EXPECT_FALSE(IcdmCodec::Build({{"a", 0.0}, {"b", 1.0}}).ok());
  EXPECT_FALSE(IcdmCodec::Build({{"a", 0.5}, {"b", 0.6}}).ok());
}

TEST(IcdmEncodeTest, ValueStaysInsideSliceImage) {
  auto codec = IcdmCodec::FromEntries(
      {{"lo", 0.025 - kLambda, kLambda, 0.025},
       {"mid", 0.95, 0.025, 0.975},
       {"hi", 0.025 - kLambda, 0.975, 1.0 - kLambda}},
      kLambda);
  ASSERT_TRUE(codec.ok()) << codec.status();
  const size_t mid = *codec->IndexOf("mid");
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    auto v = codec->Encode("mid", rng);
    ASSERT_TRUE(v.ok());
    EXPECT_GE(*v, Quantile(codec->entries()[mid].q_low));
    EXPECT_LE(*v, Quantile(codec->entries()[mid].q_high));
    EXPECT_LE(std::abs(*v), 1.96);
  }
  EXPECT_NEAR(Quantile(0.975), 1.95996, 1e-5);
}

TEST(IcdmEncodeTest, NarrowMedianSliceEncodesNearZero) {
  const double l = kLambda;
  auto codec = IcdmCodec::FromEntries(
      {{"a", 0.5 - 1e-7 - l, l, 0.5 - 1e-7},
       {"m", 2e-7, 0.5 - 1e-7, 0.5 + 1e-7},
       {"b", 0.5 - 1e-7 - l, 0.5 + 1e-7, 1.0 - l}},
      l);
  ASSERT_TRUE(codec.ok());
  Rng rng(3);
  auto v = codec->Encode("m", rng);
  ASSERT_TRUE(v.ok());
  EXPECT_NEAR(*v, 0.0, 1e-6);
}

TEST(IcdmEncodeTest, UnknownCategoryNamesIt) {
  IcdmCodec codec = ThreeCategories();
  Rng rng(1);
  auto v = codec.Encode("zzz", rng);
  ASSERT_FALSE(v.ok());
  EXPECT_NE(std::string(v.status().message()).find("zzz"), std::string::npos);
}

TEST(IcdmEncodeTest, MonteCarloSlicesAndNormality) {
  IcdmCodec codec = ThreeCategories();
  Rng rng(2024);
  const std::vector<std::pair<std::string, double>> mix = {
      {"d1", 0.2}, {"d2", 0.3}, {"d3", 0.5}};
  const int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform();
    const size_t c = u < 0.2 ? 0 : (u < 0.5 ? 1 : 2);
    auto v = codec.Encode(mix[c].first, rng);
    ASSERT_TRUE(v.ok());
    ASSERT_GE(*v, codec.ValueLow(c));
    ASSERT_LE(*v, codec.ValueHigh(c));
    ASSERT_EQ(codec.Decode(*v), mix[c].first);
    sum += *v;
    sq += *v * *v;
  }
  const double mean = sum / n;
  EXPECT_LT(std::abs(mean), 0.02);
  EXPECT_LT(std::abs(sq / n - mean * mean - 1.0), 0.03);
}

TEST(IcdmDecodeTest, ClampsAndLooksUpIntervals) {
  IcdmCodec codec = ThreeCategories();
  EXPECT_EQ(codec.Decode(-10.0), "d1");
  EXPECT_EQ(codec.Decode(10.0), "d3");
  // F(0) = 0.5 lies in [p1, p1 + p2) only when p1 + p2 > 0.5; shift d2 up.
  auto codec2 = IcdmCodec::Build({{"d1", 0.2}, {"d2", 0.35}, {"d3", 0.45}});
  ASSERT_TRUE(codec2.ok());
  EXPECT_EQ(codec2->Decode(0.0), "d2");
  EXPECT_EQ(codec2->Decode(std::nan("")), codec2->Decode(std::nan("")));
}

TEST(IcdmDecodeTest, FrequencyPreservedThroughStandardNormal) {
  IcdmCodec codec = ThreeCategories();
  Rng rng(8);
  std::map<std::string, int> counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[codec.Decode(rng.Normal())];
  EXPECT_NEAR(counts["d1"] / double(n), 0.2, 0.01);
  EXPECT_NEAR(counts["d2"] / double(n), 0.3, 0.01);
  EXPECT_NEAR(counts["d3"] / double(n), 0.5, 0.01);
}

TEST(IcdmSerializationTest, FromEntriesRoundTrip) {
  IcdmCodec codec = ThreeCategories();
  auto again = IcdmCodec::FromEntries(codec.entries(), codec.lambda());
  ASSERT_TRUE(again.ok()) << again.status();
  EXPECT_EQ(again->entries(), codec.entries());
  auto broken = codec.entries();
  broken[1].q_low += 0.01;
  EXPECT_FALSE(IcdmCodec::FromEntries(broken, codec.lambda()).ok());
}

}  // namespace
}  // namespace fedtab
