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

#include "fedtab/table_codec.h"

#include <algorithm>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fedtab/random.h"

namespace fedtab {

std::string_view SlotKindName(SlotKind kind) {
  switch (kind) {
    case SlotKind::kModeValue:
      return "mode_value";
    case SlotKind::kModeIndicator:
      return "mode_indicator";
    case SlotKind::kCategory:
      return "category";
  }
  return "unknown";
}

TableCodec::TableCodec(Schema schema, std::vector<MdtCodec> mdt,
                       std::vector<IcdmCodec> icdm)
    : schema_(std::move(schema)), mdt_(std::move(mdt)), icdm_(std::move(icdm)) {
  for (size_t c : schema_.continuous_indices()) {
    layout_.push_back({SlotKind::kModeValue, c});
    layout_.push_back({SlotKind::kModeIndicator, c});
  }
  for (size_t d : schema_.discrete_indices()) {
    layout_.push_back({SlotKind::kCategory, d});
  }
}

absl::StatusOr<TableCodec> TableCodec::Create(Schema schema,
                                              std::vector<MdtCodec> mdt,
                                              std::vector<IcdmCodec> icdm) {
  if (mdt.size() != schema.num_continuous() ||
      icdm.size() != schema.num_discrete()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "codec count mismatch: schema has ", schema.num_continuous(),
        " continuous and ", schema.num_discrete(), " discrete columns, got ",
        mdt.size(), " MDT and ", icdm.size(), " ICDM codecs"));
  }
  return TableCodec(std::move(schema), std::move(mdt), std::move(icdm));
}

absl::StatusOr<Eigen::MatrixXd> TableCodec::Encode(const Table& table,
                                                   uint64_t seed) const {
  if (!(table.schema() == schema_)) {
    return absl::InvalidArgumentError("table schema does not match codec");
  }
  const size_t n = table.num_rows();
  const size_t nc = schema_.num_continuous();
  Eigen::MatrixXd out(n, width());
  for (size_t row = 0; row < n; ++row) {
    Rng rng(MixSeed(seed, row));
    for (size_t i = 0; i < nc; ++i) {
      const size_t column = schema_.continuous_indices()[i];
      const double value = table.Continuous(column)[row];
      absl::StatusOr<MdtCodec::Encoded> enc = mdt_[i].Encode(value, rng);
      if (!enc.ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat("column '", schema_.column(column).name, "' row ",
                         row, ": ", enc.status().message()));
      }
      out(row, 2 * i) = enc->a;
      out(row, 2 * i + 1) = mdt_[i].EncodeModeIndicator(enc->mode, rng);
    }
    for (size_t j = 0; j < icdm_.size(); ++j) {
      const size_t column = schema_.discrete_indices()[j];
      const std::string& token = table.Discrete(column)[row];
      absl::StatusOr<double> enc = icdm_[j].Encode(token, rng);
      if (!enc.ok()) {
        return absl::NotFoundError(absl::StrCat(
            "column '", schema_.column(column).name, "' row ", row,
            ": unknown category '", token, "'"));
      }
      out(row, 2 * nc + j) = *enc;
    }
  }
  return out;
}

absl::StatusOr<Table> TableCodec::Decode(
    const Eigen::MatrixXd& encoded,
    const std::vector<std::pair<double, double>>* clip_ranges) const {
  if (static_cast<size_t>(encoded.cols()) != width()) {
    return absl::InvalidArgumentError(
        absl::StrCat("encoded width ", encoded.cols(), " does not match layout width ",
                     width()));
  }
  const size_t nc = schema_.num_continuous();
  if (clip_ranges != nullptr && clip_ranges->size() != nc) {
    return absl::InvalidArgumentError("clip ranges must cover every continuous column");
  }
  const size_t n = static_cast<size_t>(encoded.rows());
  std::vector<ColumnData> columns(schema_.num_columns());
  for (size_t i = 0; i < nc; ++i) {
    std::vector<double>& numbers =
        columns[schema_.continuous_indices()[i]].numbers;
    numbers.resize(n);
    for (size_t row = 0; row < n; ++row) {
      const size_t mode = mdt_[i].DecodeModeIndicator(encoded(row, 2 * i + 1));
      absl::StatusOr<double> value = mdt_[i].Decode(encoded(row, 2 * i), mode);
      if (!value.ok()) return value.status();
      double v = *value;
      if (clip_ranges != nullptr) {
        v = std::clamp(v, (*clip_ranges)[i].first, (*clip_ranges)[i].second);
      }
      numbers[row] = v;
    }
  }
  for (size_t j = 0; j < icdm_.size(); ++j) {
    std::vector<std::string>& tokens =
        columns[schema_.discrete_indices()[j]].tokens;
    tokens.reserve(n);
    for (size_t row = 0; row < n; ++row) {
      tokens.push_back(icdm_[j].Decode(encoded(row, 2 * nc + j)));
    }
  }
  return Table::Create(schema_, std::move(columns));
}

}  // namespace fedtab
