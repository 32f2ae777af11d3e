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

#include "fedtab/synthesis.h"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "codec_fixtures.h"
#include "fedtab/csv_io.h"
#include "fedtab/random.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fedtab {
namespace {

using namespace ::fedtab::testing;  // NOLINT

Eigen::MatrixXd SampleCovariance(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd c = x.rowwise() - mean;
  return c.transpose() * c / static_cast<double>(x.rows() - 1);
}

TEST(SampleCorrelatedTest, CovarianceMatchesFactor) {
  Eigen::MatrixXd sigma(4, 4);
  sigma << 1.0, 0.3, 0.8, -0.2,
           0.3, 1.0, 0.1, 0.0,
           0.8, 0.1, 1.0, 0.4,
          -0.2, 0.0, 0.4, 1.0;
  Eigen::MatrixXd u = sigma.llt().matrixL();
  Eigen::MatrixXd x = SampleCorrelated(u, 100000, 5);
  ASSERT_EQ(x.rows(), 100000);
  EXPECT_LT((SampleCovariance(x) - u * u.transpose()).cwiseAbs().maxCoeff(),
            0.02);
  const Eigen::MatrixXd cov = SampleCovariance(x);
  EXPECT_NEAR(cov(0, 2) / std::sqrt(cov(0, 0) * cov(2, 2)), 0.8, 0.02);
}

TEST(SampleCorrelatedTest, BlocksAreDeterministic) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(3, 3);
  const size_t n = 2 * kSynthesisBlockRows + 17;
  Eigen::MatrixXd a = SampleCorrelated(u, n, 9);
  EXPECT_EQ(a, SampleCorrelated(u, n, 9));
  EXPECT_NE(a, SampleCorrelated(u, n, 10));
  // A prefix only depends on its own blocks.
  Eigen::MatrixXd b = SampleCorrelated(u, kSynthesisBlockRows, 9);
  EXPECT_EQ(a.topRows(kSynthesisBlockRows), b);
}

Schema TwoColumnSchema() { return MakeSchema({Cont("x"), Label()}); }

TEST(SynthesizeTest, IdentityFactorGivesStandardNormalAndSingleCategory) {
  TableCodec codec = MakeCodec(TwoColumnSchema(), {MakeMdt({{1, 0, 1}})},
                               {MakeIcdm({{"only", 1.0}})});
  auto t = Synthesize(codec, Eigen::MatrixXd::Identity(3, 3),
                      {.num_rows = 50000, .seed = 1});
  ASSERT_TRUE(t.ok()) << t.status();
  EXPECT_EQ(t->num_rows(), 50000u);
  EXPECT_EQ(t->num_synthetic(), 50000u);
  double sum = 0, sq = 0;
  for (double v : t->Continuous(0)) {
    sum += v;
    sq += v * v;
  }
  const double mean = sum / 50000;
  EXPECT_LT(std::abs(mean), 0.02);
  EXPECT_LT(std::abs(sq / 50000 - mean * mean - 1.0), 0.03);
  for (const std::string& l : t->Labels()) ASSERT_EQ(l, "only");
}

TEST(SynthesizeTest, CategoryFrequenciesPreserved) {
  TableCodec codec = MakeCodec(TwoColumnSchema(), {MakeMdt({{1, 0, 1}})},
                               {MakeIcdm({{"a", 0.3}, {"b", 0.7}})});
  auto t = Synthesize(codec, Eigen::MatrixXd::Identity(3, 3),
                      {.num_rows = 100000, .seed = 2});
  ASSERT_TRUE(t.ok());
  size_t a = 0;
  for (const std::string& l : t->Labels()) a += l == "a";
  EXPECT_NEAR(a / 1e5, 0.3, 0.01);
}

TEST(SynthesizeTest, LayoutMismatchAndDeterminism) {
  TableCodec codec = MakeCodec(TwoColumnSchema(), {MakeMdt({{1, 0, 1}})},
                               {MakeIcdm({{"a", 0.3}, {"b", 0.7}})});
  EXPECT_FALSE(Synthesize(codec, Eigen::MatrixXd::Identity(4, 4),
                          {.num_rows = 10, .seed = 1})
                   .ok());
  auto a = Synthesize(codec, Eigen::MatrixXd::Identity(3, 3),
                      {.num_rows = 100, .seed = 3});
  auto b = Synthesize(codec, Eigen::MatrixXd::Identity(3, 3),
                      {.num_rows = 100, .seed = 3});
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(WriteCsv(*a, true), WriteCsv(*b, true));
  auto zero = Synthesize(codec, Eigen::MatrixXd::Identity(3, 3),
                         {.num_rows = 0, .seed = 3});
  ASSERT_TRUE(zero.ok());
  EXPECT_EQ(zero->num_rows(), 0u);
}

TEST(SynthesizeTest, ClipRangesApply) {
  TableCodec codec = MakeCodec(TwoColumnSchema(), {MakeMdt({{1, 0, 1}})},
                               {MakeIcdm({{"a", 1.0}})});
  auto t = Synthesize(codec, Eigen::MatrixXd::Identity(3, 3),
                      {.num_rows = 1000, .seed = 1, .clip_ranges = {{-1, 1}}});
  ASSERT_TRUE(t.ok());
  for (double v : t->Continuous(0)) {
    ASSERT_GE(v, -1.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(AugmentClientTest, ConcatenatesWithProvenance) {
  Schema schema = TwoColumnSchema();
  std::vector<double> x(100, 1.0);
  std::vector<std::string> y(100, "a");
  Table local = MakeTable(schema, {Numbers(x), Tokens(y)});
  auto synth = Table::Create(schema, {Numbers(x), Tokens(y)},
                             std::vector<uint8_t>(100, 1));
  ASSERT_TRUE(synth.ok());
  auto joined = AugmentClient(local, *synth);
  ASSERT_TRUE(joined.ok());
  EXPECT_EQ(joined->num_rows(), 200u);
  EXPECT_EQ(joined->num_synthetic(), 100u);
  EXPECT_EQ(joined->synthetic_flags()[0], 0);
  EXPECT_EQ(joined->synthetic_flags()[199], 1);

  auto same = AugmentClient(local, Table::Empty(schema));
  ASSERT_TRUE(same.ok());
  EXPECT_EQ(*same, local);

  Table other = MakeTable(MakeSchema({Cont("z"), Label()}),
                          {Numbers({1}), Tokens({"a"})});
  EXPECT_FALSE(AugmentClient(local, other).ok());
}

}  // namespace
}  // namespace fedtab
