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

#ifndef FEDTAB_TABLE_H_
#define FEDTAB_TABLE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace fedtab {

enum class ColumnKind { kContinuous, kDiscrete };

std::string_view ColumnKindName(ColumnKind kind);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  bool is_label = false;

  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

// Ordered column descriptors with exactly one discrete label column.
class Schema {
 public:
  static absl::StatusOr<Schema> Create(std::vector<ColumnSpec> columns);
  // Parses `{"columns":[{"name":...,"kind":"continuous|discrete","label":bool}]}`.
  static absl::StatusOr<Schema> FromJson(std::string_view json);
  std::string ToJson() const;

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  size_t num_columns() const { return columns_.size(); }
  const ColumnSpec& column(size_t i) const { return columns_[i]; }
  size_t label_index() const { return label_index_; }
  // Schema positions of continuous / discrete columns, in schema order. The
  // label column is among the discrete ones.
  const std::vector<size_t>& continuous_indices() const { return continuous_; }
  const std::vector<size_t>& discrete_indices() const { return discrete_; }
  size_t num_continuous() const { return continuous_.size(); }
  size_t num_discrete() const { return discrete_.size(); }
  std::optional<size_t> Find(std::string_view name) const;

  friend bool operator==(const Schema& a, const Schema& b) {
    return a.columns_ == b.columns_;
  }

 private:
  Schema() = default;

  std::vector<ColumnSpec> columns_;
  size_t label_index_ = 0;
  std::vector<size_t> continuous_;
  std::vector<size_t> discrete_;
};

// Storage for one column. Exactly one of the two vectors is populated,
// according to the column kind.
struct ColumnData {
  std::vector<double> numbers;
  std::vector<std::string> tokens;

  friend bool operator==(const ColumnData&, const ColumnData&) = default;
};

// Immutable column-major table. Rows may carry a provenance flag marking
// them as synthetic.
class Table {
 public:
  static absl::StatusOr<Table> Create(Schema schema,
                                      std::vector<ColumnData> columns,
                                      std::vector<uint8_t> synthetic = {});
  // A table with zero rows.
  static Table Empty(Schema schema);

  const Schema& schema() const { return schema_; }
  size_t num_rows() const { return num_rows_; }
  std::span<const double> Continuous(size_t column) const {
    return columns_[column].numbers;
  }
  std::span<const std::string> Discrete(size_t column) const {
    return columns_[column].tokens;
  }
  std::span<const std::string> Labels() const {
    return Discrete(schema_.label_index());
  }
  const std::vector<ColumnData>& columns() const { return columns_; }
  // One byte per row; nonzero marks a synthetic row.
  std::span<const uint8_t> synthetic_flags() const { return synthetic_; }
  size_t num_synthetic() const;

  // Rows at `indices`, in the given order.
  Table Select(std::span<const size_t> indices) const;

  friend bool operator==(const Table&, const Table&) = default;

 private:
  Table(Schema schema, std::vector<ColumnData> columns,
        std::vector<uint8_t> synthetic, size_t num_rows)
      : schema_(std::move(schema)),
        columns_(std::move(columns)),
        synthetic_(std::move(synthetic)),
        num_rows_(num_rows) {}

  Schema schema_;
  std::vector<ColumnData> columns_;
  std::vector<uint8_t> synthetic_;
  size_t num_rows_ = 0;
};

// Row-wise concatenation of tables with identical schemas. Provenance flags
// are carried through.
absl::StatusOr<Table> ConcatTables(std::span<const Table> tables);

}  // namespace fedtab

#endif  // FEDTAB_TABLE_H_
