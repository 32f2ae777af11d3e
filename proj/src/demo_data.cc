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

#include "fedtab/demo_data.h"

#include <cmath>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fedtab/random.h"

namespace fedtab {

absl::StatusOr<Table> MakeDemoTable(const DemoDataSpec& spec) {
  if (spec.num_classes < 2 || spec.num_continuous < 0 ||
      spec.num_discrete < 0 || spec.categories < 1) {
    return absl::InvalidArgumentError("invalid demo data spec");
  }
  std::vector<ColumnSpec> columns;
  for (int j = 0; j < spec.num_continuous; ++j) {
    columns.push_back({absl::StrCat("x", j), ColumnKind::kContinuous, false});
  }
  for (int j = 0; j < spec.num_discrete; ++j) {
    columns.push_back({absl::StrCat("d", j), ColumnKind::kDiscrete, false});
  }
  columns.push_back({"label", ColumnKind::kDiscrete, true});
  absl::StatusOr<Schema> schema = Schema::Create(std::move(columns));
  if (!schema.ok()) return schema.status();

  std::vector<ColumnData> data(schema->num_columns());
  Rng rng(spec.seed);
  const int nc = spec.num_continuous;
  for (size_t r = 0; r < spec.rows; ++r) {
    const int label = static_cast<int>(rng.UniformInt(spec.num_classes));
    for (int j = 0; j < nc; ++j) {
      // Class means follow cos/sin of evenly spaced angles, rotated per
      // feature so every feature separates a different pair of classes.
      const double angle =
          2.0 * 3.14159265358979323846 * (label + 0.37 * j) / spec.num_classes;
      double value = spec.separation * 2.0 * std::cos(angle) + rng.Normal();
      if (j % 2 == 1 && rng.Uniform() < 0.5) value += 6.0;
      data[j].numbers.push_back(value);
    }
    for (int j = 0; j < spec.num_discrete; ++j) {
      int token = rng.Uniform() < spec.discrete_signal
                      ? (label + j) % spec.categories
                      : static_cast<int>(rng.UniformInt(spec.categories));
      data[nc + j].tokens.push_back(absl::StrCat("k", token));
    }
    data[nc + spec.num_discrete].tokens.push_back(absl::StrCat("c", label));
  }
  return Table::Create(*std::move(schema), std::move(data));
}

absl::StatusOr<Table> MakeCorrelatedClassTable(
    const CorrelatedClassSpec& spec) {
  if (spec.num_features < 1 || !(spec.rho >= 0.0 && spec.rho < 1.0)) {
    return absl::InvalidArgumentError("invalid correlated class spec");
  }
  std::vector<ColumnSpec> columns;
  for (int j = 0; j < spec.num_features; ++j) {
    columns.push_back({absl::StrCat("x", j), ColumnKind::kContinuous, false});
  }
  columns.push_back({"label", ColumnKind::kDiscrete, true});
  absl::StatusOr<Schema> schema = Schema::Create(std::move(columns));
  if (!schema.ok()) return schema.status();

  constexpr double kPriors[] = {0.25, 0.35, 0.40};
  std::vector<ColumnData> data(schema->num_columns());
  Rng rng(spec.seed);
  const double shared = std::sqrt(spec.rho);
  const double own = std::sqrt(1.0 - spec.rho);
  for (size_t r = 0; r < spec.rows; ++r) {
    const double u = rng.Uniform();
    const int label = u < kPriors[0] ? 0 : (u < kPriors[0] + kPriors[1] ? 1 : 2);
    const double common = rng.Normal();
    for (int j = 0; j < spec.num_features; ++j) {
      double x = shared * common + own * rng.Normal();
      if (j == 0) x += spec.separation * (label - 1);
      data[j].numbers.push_back(x);
    }
    data[spec.num_features].tokens.push_back(absl::StrCat("c", label));
  }
  return Table::Create(*std::move(schema), std::move(data));
}

}  // namespace fedtab
