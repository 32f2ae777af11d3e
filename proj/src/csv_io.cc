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

#include "fedtab/csv_io.h"

#include <charconv>
#include <cmath>
#include <optional>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fedtab {
namespace {

bool NeedsQuoting(std::string_view field) {
  return field.find_first_of(",\"\r\n") != std::string_view::npos ||
         (!field.empty() && (field.front() == ' ' || field.back() == ' '));
}

void AppendField(std::string& out, std::string_view field) {
  if (!NeedsQuoting(field)) {
    out.append(field);
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

std::optional<double> ParseReal(std::string_view cell) {
  while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
  while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(),
                                   value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() ||
      !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

absl::StatusOr<std::vector<std::vector<std::string>>> ParseCsv(
    std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool record_has_content = false;
  size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    // A line that is completely empty is skipped rather than read as a
    // single empty field.
    if (record_has_content || record.size() > 1) {
      records.push_back(std::move(record));
    }
    record.clear();
    record_has_content = false;
  };

  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          return absl::InvalidArgumentError(
              absl::StrCat("line ", line, ": stray quote inside field"));
        }
        in_quotes = true;
        field_was_quoted = true;
        record_has_content = true;
        break;
      case ',':
        end_field();
        record_has_content = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        end_record();
        ++line;
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        if (field_was_quoted) {
          return absl::InvalidArgumentError(absl::StrCat(
              "line ", line, ": text after closing quote"));
        }
        field.push_back(c);
        record_has_content = true;
    }
  }
  if (in_quotes) {
    return absl::InvalidArgumentError("unterminated quoted field");
  }
  if (record_has_content || !field.empty() || !record.empty()) end_record();
  return records;
}

absl::StatusOr<Table> LoadTable(std::string_view csv_bytes,
                                const Schema& schema) {
  auto records = ParseCsv(csv_bytes);
  if (!records.ok()) return records.status();
  if (records->empty()) {
    return absl::InvalidArgumentError("empty CSV file: header row required");
  }
  const std::vector<std::string>& header = records->front();

  // position in header -> schema column (or provenance)
  constexpr size_t kProvenance = static_cast<size_t>(-1);
  std::vector<size_t> target(header.size());
  std::vector<bool> seen(schema.num_columns(), false);
  bool has_provenance = false;
  for (size_t h = 0; h < header.size(); ++h) {
    if (header[h] == kSyntheticColumn && !schema.Find(header[h])) {
      if (has_provenance) {
        return absl::InvalidArgumentError("duplicate provenance column");
      }
      has_provenance = true;
      target[h] = kProvenance;
      continue;
    }
    std::optional<size_t> col = schema.Find(header[h]);
    if (!col.has_value()) {
      return absl::InvalidArgumentError(
          absl::StrCat("header column '", header[h], "' is not in the schema"));
    }
    if (seen[*col]) {
      return absl::InvalidArgumentError(
          absl::StrCat("header repeats column '", header[h], "'"));
    }
    seen[*col] = true;
    target[h] = *col;
  }
  for (size_t c = 0; c < schema.num_columns(); ++c) {
    if (!seen[c]) {
      return absl::InvalidArgumentError(absl::StrCat(
          "missing column '", schema.column(c).name, "' in CSV header"));
    }
  }

  const size_t num_rows = records->size() - 1;
  std::vector<ColumnData> columns(schema.num_columns());
  for (size_t c = 0; c < schema.num_columns(); ++c) {
    if (schema.column(c).kind == ColumnKind::kContinuous) {
      columns[c].numbers.reserve(num_rows);
    } else {
      columns[c].tokens.reserve(num_rows);
    }
  }
  std::vector<uint8_t> provenance;
  if (has_provenance) provenance.reserve(num_rows);

  for (size_t r = 0; r < num_rows; ++r) {
    std::vector<std::string>& record = (*records)[r + 1];
    if (record.size() != header.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", r + 1, ": expected ", header.size(),
                       " cells, found ", record.size()));
    }
    for (size_t h = 0; h < header.size(); ++h) {
      std::string& cell = record[h];
      if (target[h] == kProvenance) {
        if (cell != "0" && cell != "1") {
          return absl::InvalidArgumentError(
              absl::StrCat("row ", r + 1, ", column '", std::string(kSyntheticColumn),
                           "': expected 0 or 1, got '", cell, "'"));
        }
        provenance.push_back(cell == "1" ? 1 : 0);
        continue;
      }
      const ColumnSpec& spec = schema.column(target[h]);
      if (cell.empty()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "row ", r + 1, ", column '", spec.name, "': missing cell"));
      }
      if (spec.kind == ColumnKind::kContinuous) {
        std::optional<double> value = ParseReal(cell);
        if (!value.has_value()) {
          return absl::InvalidArgumentError(
              absl::StrCat("row ", r + 1, ", column '", spec.name,
                           "': cannot parse '", cell, "' as a finite real"));
        }
        columns[target[h]].numbers.push_back(*value);
      } else {
        columns[target[h]].tokens.push_back(std::move(cell));
      }
    }
  }
  return Table::Create(schema, std::move(columns), std::move(provenance));
}

std::string FormatDouble(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::string WriteCsv(const Table& table, bool include_provenance) {
  const Schema& schema = table.schema();
  std::string out;
  for (size_t c = 0; c < schema.num_columns(); ++c) {
    if (c > 0) out.push_back(',');
    AppendField(out, schema.column(c).name);
  }
  if (include_provenance) {
    out.push_back(',');
    out.append(kSyntheticColumn);
  }
  out.push_back('\n');
  for (size_t r = 0; r < table.num_rows(); ++r) {
    for (size_t c = 0; c < schema.num_columns(); ++c) {
      if (c > 0) out.push_back(',');
      if (schema.column(c).kind == ColumnKind::kContinuous) {
        out.append(FormatDouble(table.Continuous(c)[r]));
      } else {
        AppendField(out, table.Discrete(c)[r]);
      }
    }
    if (include_provenance) {
      out.push_back(',');
      out.push_back(table.synthetic_flags()[r] ? '1' : '0');
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace fedtab
