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

#include "fedtab/partition.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "fedtab/csv_io.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fedtab {
namespace {

using ::fedtab::testing::Cont;
using ::fedtab::testing::Label;
using ::fedtab::testing::MakeSchema;
using ::fedtab::testing::MakeTable;
using ::fedtab::testing::Numbers;
using ::fedtab::testing::Tokens;

Table LabelledTable(const std::vector<std::pair<std::string, size_t>>& groups) {
  std::vector<double> x;
  std::vector<std::string> labels;
  for (const auto& [label, n] : groups) {
    for (size_t i = 0; i < n; ++i) {
      x.push_back(static_cast<double>(x.size()));
      labels.push_back(label);
    }
  }
  return MakeTable(MakeSchema({Cont("x"), Label()}),
                   {Numbers(std::move(x)), Tokens(std::move(labels))});
}

TEST(LargestRemainderTest, SumsToCount) {
  const std::vector<double> p = {0.333, 0.333, 0.334};
  const std::vector<size_t> c = LargestRemainderCounts(p, 10);
  EXPECT_EQ(std::accumulate(c.begin(), c.end(), size_t{0}), 10u);
  EXPECT_EQ(c[2], 4u);
}

TEST(DirichletPartitionTest, LargeBetaIsNearUniform) {
  Table t = LabelledTable({{"a", 1000}});
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    auto shards = DirichletPartition(t, {.beta = 100, .num_clients = 2,
                                         .seed = seed});
    ASSERT_TRUE(shards.ok());
    for (const Table& s : *shards) {
      EXPECT_GE(s.num_rows(), 400u);
      EXPECT_LE(s.num_rows(), 600u);
    }
  }
}

TEST(DirichletPartitionTest, SingleClientIsIdentity) {
  Table t = LabelledTable({{"a", 10}, {"b", 7}});
  auto shards = DirichletPartition(t, {.beta = 0.5, .num_clients = 1});
  ASSERT_TRUE(shards.ok());
  ASSERT_EQ(shards->size(), 1u);
  EXPECT_EQ((*shards)[0], t);
}

TEST(DirichletPartitionTest, SmallBetaIsSkewed) {
  Table t = LabelledTable({{"a", 300}, {"b", 300}, {"c", 300}});
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    auto shards = DirichletPartition(t, {.beta = 0.05, .num_clients = 5,
                                         .seed = seed});
    ASSERT_TRUE(shards.ok());
    bool skewed = false;
    size_t total = 0;
    for (const Table& s : *shards) {
      total += s.num_rows();
      std::map<std::string, size_t> counts;
      for (const std::string& l : s.Labels()) ++counts[l];
      for (const char* label : {"a", "b", "c"}) {
        if (counts[label] < 30) skewed = true;
      }
    }
    EXPECT_EQ(total, 900u);
    EXPECT_TRUE(skewed) << "seed " << seed;
  }
}

TEST(DirichletPartitionTest, DeterministicAndDisjoint) {
  Table t = LabelledTable({{"a", 50}, {"b", 80}});
  PartitionPlan plan{.beta = 0.3, .num_clients = 4, .seed = 9};
  auto a = DirichletPartition(t, plan);
  auto b = DirichletPartition(t, plan);
  ASSERT_TRUE(a.ok() && b.ok());
  std::vector<double> seen;
  for (size_t k = 0; k < a->size(); ++k) {
    EXPECT_EQ(WriteCsv((*a)[k]), WriteCsv((*b)[k]));
    for (double x : (*a)[k].Continuous(0)) seen.push_back(x);
  }
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(std::adjacent_find(seen.begin(), seen.end()), seen.end());
  EXPECT_EQ(seen.size(), 130u);
}

TEST(DirichletPartitionTest, Errors) {
  Table t = LabelledTable({{"a", 3}});
  EXPECT_FALSE(DirichletPartition(t, {.beta = 1, .num_clients = 4}).ok());
  EXPECT_FALSE(DirichletPartition(t, {.beta = 0, .num_clients = 2}).ok());
  EXPECT_FALSE(DirichletPartition(t, {.beta = 1, .num_clients = 0}).ok());
}

TEST(TrainTestSplitTest, SizesAndDeterminism) {
  Table t = LabelledTable({{"a", 60}, {"b", 40}});
  auto split = TrainTestSplit(t, 0.2, 3);
  ASSERT_TRUE(split.ok());
  EXPECT_EQ(split->first.num_rows() + split->second.num_rows(), 100u);
  EXPECT_EQ(split->second.num_rows(), 20u);
  auto again = TrainTestSplit(t, 0.2, 3);
  EXPECT_EQ(again->second, split->second);
  EXPECT_FALSE(TrainTestSplit(t, 1.0, 3).ok());
}

}  // namespace
}  // namespace fedtab
