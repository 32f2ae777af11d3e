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

#ifndef FEDTAB_METRICS_H_
#define FEDTAB_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "fedtab/table.h"

namespace fedtab {

// Jensen-Shannon divergence (base 2) between the category distributions of
// two samples, over the union of their categories.
absl::StatusOr<double> ColumnJsd(std::span<const std::string> real,
                                 std::span<const std::string> synth);

// Wasserstein-1 distance between two samples after min-max scaling both by
// the range of `real`. When the samples differ in size the larger one is
// subsampled without replacement (seeded) down to the smaller size.
absl::StatusOr<double> ColumnWd(std::span<const double> real,
                                std::span<const double> synth,
                                uint64_t seed = 0);

struct ColumnScore {
  std::string column;
  ColumnKind kind = ColumnKind::kContinuous;
  double score = 0.0;
};

struct SimilarityReport {
  std::optional<double> avg_jsd;
  std::optional<double> avg_wd;
  std::vector<ColumnScore> per_column;

  std::string ToJson() const;
  // Rows of `column,kind,score`.
  std::string ToCsv() const;
};

absl::StatusOr<SimilarityReport> ComputeSimilarity(const Table& real,
                                                   const Table& synth,
                                                   uint64_t seed = 0);

}  // namespace fedtab

#endif  // FEDTAB_METRICS_H_
