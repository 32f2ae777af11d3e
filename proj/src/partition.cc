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
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fedtab/random.h"

namespace fedtab {
namespace {

template <typename T>
void Shuffle(std::vector<T>& items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.UniformInt(i)]);
  }
}

std::vector<double> SampleDirichlet(double beta, int k, Rng& rng) {
  std::vector<double> logs(k);
  for (double& v : logs) v = rng.LogGamma(beta);
  const double peak = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (double& v : logs) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : logs) v /= total;
  return logs;
}

}  // namespace

std::vector<size_t> LargestRemainderCounts(std::span<const double> proportions,
                                           size_t count) {
  const size_t k = proportions.size();
  std::vector<size_t> counts(k, 0);
  if (k == 0) return counts;
  std::vector<double> remainders(k);
  size_t assigned = 0;
  for (size_t i = 0; i < k; ++i) {
    const double exact = proportions[i] * static_cast<double>(count);
    const double whole = std::floor(exact);
    counts[i] = static_cast<size_t>(whole);
    remainders[i] = exact - whole;
    assigned += counts[i];
  }
  // Floating error can push the floor sum one over when proportions sum to
  // slightly more than 1; take back from the smallest remainders.
  std::vector<size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return remainders[a] > remainders[b];
  });
  for (size_t i = 0; assigned < count; i = (i + 1) % k) {
    ++counts[order[i]];
    ++assigned;
  }
  for (size_t i = k; assigned > count; i = (i == 1 ? k : i - 1)) {
    if (counts[order[i - 1]] > 0) {
      --counts[order[i - 1]];
      --assigned;
    }
  }
  return counts;
}

absl::StatusOr<std::vector<Table>> DirichletPartition(
    const Table& table, const PartitionPlan& plan) {
  if (!(plan.beta > 0.0) || !std::isfinite(plan.beta)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Dirichlet concentration must be positive, got ",
                     plan.beta));
  }
  if (plan.num_clients < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("need at least one client, got ", plan.num_clients));
  }
  const size_t k = static_cast<size_t>(plan.num_clients);
  if (k > table.num_rows()) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot split ", table.num_rows(), " rows across ", k,
                     " clients"));
  }

  std::map<std::string, std::vector<size_t>> rows_by_label;
  std::span<const std::string> labels = table.Labels();
  for (size_t r = 0; r < labels.size(); ++r) {
    rows_by_label[labels[r]].push_back(r);
  }

  Rng rng(plan.seed);
  std::vector<std::vector<size_t>> assignment(k);
  for (auto& [label, rows] : rows_by_label) {
    const std::vector<double> proportions =
        SampleDirichlet(plan.beta, plan.num_clients, rng);
    const std::vector<size_t> counts =
        LargestRemainderCounts(proportions, rows.size());
    Shuffle(rows, rng);
    size_t offset = 0;
    for (size_t c = 0; c < k; ++c) {
      assignment[c].insert(assignment[c].end(), rows.begin() + offset,
                           rows.begin() + offset + counts[c]);
      offset += counts[c];
    }
  }

  std::vector<Table> shards;
  shards.reserve(k);
  for (std::vector<size_t>& rows : assignment) {
    std::sort(rows.begin(), rows.end());
    shards.push_back(table.Select(rows));
  }
  return shards;
}

absl::StatusOr<std::pair<Table, Table>> TrainTestSplit(const Table& table,
                                                       double test_fraction,
                                                       uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("test fraction must be in [0, 1), got ", test_fraction));
  }
  std::vector<size_t> rows(table.num_rows());
  std::iota(rows.begin(), rows.end(), 0);
  Rng rng(MixSeed(seed, 0x7e57));
  Shuffle(rows, rng);
  const size_t num_test = static_cast<size_t>(
      std::llround(test_fraction * static_cast<double>(rows.size())));
  std::vector<size_t> test(rows.begin(), rows.begin() + num_test);
  std::vector<size_t> train(rows.begin() + num_test, rows.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return std::make_pair(table.Select(train), table.Select(test));
}

}  // namespace fedtab
