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

#ifndef FEDTAB_PARTITION_H_
#define FEDTAB_PARTITION_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "fedtab/table.h"

namespace fedtab {

struct PartitionPlan {
  double beta = 0.5;  // Dirichlet concentration, > 0
  int num_clients = 5;
  uint64_t seed = 0;
};

// Splits `count` items according to `proportions` (nonnegative, summing to
// ~1) with the largest-remainder method. Ties in the fractional part go to
// the lower index. The result always sums to `count`.
std::vector<size_t> LargestRemainderCounts(std::span<const double> proportions,
                                           size_t count);

// Label-skew partition: for each label (in lexicographic order) draws client
// proportions from Dir(beta) and hands out that label's rows, shuffled, in
// those proportions. Shards keep the input's row order.
absl::StatusOr<std::vector<Table>> DirichletPartition(const Table& table,
                                                      const PartitionPlan& plan);

// Seeded shuffle split into (train, test) with round(fraction * N) test rows.
absl::StatusOr<std::pair<Table, Table>> TrainTestSplit(const Table& table,
                                                       double test_fraction,
                                                       uint64_t seed);

}  // namespace fedtab

#endif  // FEDTAB_PARTITION_H_
