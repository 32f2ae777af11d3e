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

#include "fedtab/table.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace fedtab {

std::string_view ColumnKindName(ColumnKind kind) {
  return kind == ColumnKind::kContinuous ? "continuous" : "discrete";
}

absl::StatusOr<Schema> Schema::Create(std::vector<ColumnSpec> columns) {
  if (columns.empty()) {
    return absl::InvalidArgumentError("schema has no columns");
  }
  Schema schema;
  std::set<std::string> names;
  int labels = 0;
  for (size_t i = 0; i < columns.size(); ++i) {
    const ColumnSpec& spec = columns[i];
    if (spec.name.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("schema column ", i, " has an empty name"));
    }
    if (!names.insert(spec.name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate column name '", spec.name, "'"));
    }
    if (spec.is_label) {
      ++labels;
      if (spec.kind != ColumnKind::kDiscrete) {
        return absl::InvalidArgumentError(absl::StrCat(
            "label column '", spec.name, "' must be discrete"));
      }
      schema.label_index_ = i;
    }
    if (spec.kind == ColumnKind::kContinuous) {
      schema.continuous_.push_back(i);
    } else {
      schema.discrete_.push_back(i);
    }
  }
  if (labels != 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "schema must have exactly one label column, found ", labels));
  }
  schema.columns_ = std::move(columns);
  return schema;
}

absl::StatusOr<Schema> Schema::FromJson(std::string_view json) {
  nlohmann::json doc = nlohmann::json::parse(json, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("columns") ||
      !doc["columns"].is_array()) {
    return absl::InvalidArgumentError(
        "schema must be a JSON object with a \"columns\" array");
  }
  std::vector<ColumnSpec> columns;
  for (const auto& entry : doc["columns"]) {
    if (!entry.is_object() || !entry.contains("name") ||
        !entry["name"].is_string() || !entry.contains("kind") ||
        !entry["kind"].is_string()) {
      return absl::InvalidArgumentError(
          "each schema column needs string \"name\" and \"kind\" fields");
    }
    ColumnSpec spec;
    spec.name = entry["name"].get<std::string>();
    const std::string kind = entry["kind"].get<std::string>();
    if (kind == "continuous") {
      spec.kind = ColumnKind::kContinuous;
    } else if (kind == "discrete") {
      spec.kind = ColumnKind::kDiscrete;
    } else {
      return absl::InvalidArgumentError(absl::StrCat(
          "column '", spec.name, "' has unknown kind '", kind, "'"));
    }
    if (entry.contains("label")) {
      if (!entry["label"].is_boolean()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "column '", spec.name, "': \"label\" must be a boolean"));
      }
      spec.is_label = entry["label"].get<bool>();
    }
    columns.push_back(std::move(spec));
  }
  return Create(std::move(columns));
}

std::string Schema::ToJson() const {
  nlohmann::json columns = nlohmann::json::array();
  for (const ColumnSpec& spec : columns_) {
    columns.push_back({{"name", spec.name},
                       {"kind", std::string(ColumnKindName(spec.kind))},
                       {"label", spec.is_label}});
  }
  return nlohmann::json{{"columns", columns}}.dump();
}

std::optional<size_t> Schema::Find(std::string_view name) const {
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

absl::StatusOr<Table> Table::Create(Schema schema,
                                    std::vector<ColumnData> columns,
                                    std::vector<uint8_t> synthetic) {
  if (columns.size() != schema.num_columns()) {
    return absl::InvalidArgumentError(
        absl::StrCat("table has ", columns.size(), " columns, schema has ",
                     schema.num_columns()));
  }
  std::optional<size_t> rows;
  for (size_t c = 0; c < columns.size(); ++c) {
    const ColumnSpec& spec = schema.column(c);
    const ColumnData& data = columns[c];
    size_t n;
    if (spec.kind == ColumnKind::kContinuous) {
      if (!data.tokens.empty()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "continuous column '", spec.name, "' holds category tokens"));
      }
      for (size_t r = 0; r < data.numbers.size(); ++r) {
        if (!std::isfinite(data.numbers[r])) {
          return absl::InvalidArgumentError(
              absl::StrCat("row ", r + 1, ", column '", spec.name,
                           "': continuous cell is not finite"));
        }
      }
      n = data.numbers.size();
    } else {
      if (!data.numbers.empty()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "discrete column '", spec.name, "' holds real numbers"));
      }
      n = data.tokens.size();
    }
    if (rows.has_value() && *rows != n) {
      return absl::InvalidArgumentError(
          absl::StrCat("column '", spec.name, "' has ", n,
                       " cells, expected ", *rows));
    }
    rows = n;
  }
  const size_t num_rows = rows.value_or(0);
  if (synthetic.empty()) {
    synthetic.assign(num_rows, 0);
  } else if (synthetic.size() != num_rows) {
    return absl::InvalidArgumentError("provenance flags do not match rows");
  }
  return Table(std::move(schema), std::move(columns), std::move(synthetic),
               num_rows);
}

Table Table::Empty(Schema schema) {
  std::vector<ColumnData> columns(schema.num_columns());
  return Table(std::move(schema), std::move(columns), {}, 0);
}

size_t Table::num_synthetic() const {
  return static_cast<size_t>(
      std::count_if(synthetic_.begin(), synthetic_.end(),
                    [](uint8_t f) { return f != 0; }));
}

Table Table::Select(std::span<const size_t> indices) const {
  std::vector<ColumnData> out(columns_.size());
  for (size_t c = 0; c < columns_.size(); ++c) {
    const ColumnData& in = columns_[c];
    if (schema_.column(c).kind == ColumnKind::kContinuous) {
      out[c].numbers.reserve(indices.size());
      for (size_t i : indices) out[c].numbers.push_back(in.numbers[i]);
    } else {
      out[c].tokens.reserve(indices.size());
      for (size_t i : indices) out[c].tokens.push_back(in.tokens[i]);
    }
  }
  std::vector<uint8_t> flags;
  flags.reserve(indices.size());
  for (size_t i : indices) flags.push_back(synthetic_[i]);
  return Table(schema_, std::move(out), std::move(flags), indices.size());
}

absl::StatusOr<Table> ConcatTables(std::span<const Table> tables) {
  if (tables.empty()) {
    return absl::InvalidArgumentError("nothing to concatenate");
  }
  const Schema& schema = tables.front().schema();
  std::vector<ColumnData> columns(schema.num_columns());
  std::vector<uint8_t> flags;
  for (const Table& t : tables) {
    if (!(t.schema() == schema)) {
      return absl::InvalidArgumentError("cannot concatenate: schema mismatch");
    }
    for (size_t c = 0; c < columns.size(); ++c) {
      const ColumnData& in = t.columns()[c];
      columns[c].numbers.insert(columns[c].numbers.end(), in.numbers.begin(),
                                in.numbers.end());
      columns[c].tokens.insert(columns[c].tokens.end(), in.tokens.begin(),
                               in.tokens.end());
    }
    flags.insert(flags.end(), t.synthetic_flags().begin(),
                 t.synthetic_flags().end());
  }
  return Table::Create(schema, std::move(columns), std::move(flags));
}

}  // namespace fedtab
