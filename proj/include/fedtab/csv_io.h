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

#ifndef FEDTAB_CSV_IO_H_
#define FEDTAB_CSV_IO_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "fedtab/table.h"

namespace fedtab {

// Name of the optional provenance column written next to synthetic rows.
inline constexpr std::string_view kSyntheticColumn = "__synthetic";

// Splits RFC-4180 CSV text into records. Accepts LF or CRLF line endings and
// a leading UTF-8 byte-order mark.
absl::StatusOr<std::vector<std::vector<std::string>>> ParseCsv(
    std::string_view text);

// Parses CSV bytes against an explicit schema. The header must name every
// schema column exactly once (any order); a `__synthetic` column, if
// present, is read as provenance. Errors name the offending row and column.
absl::StatusOr<Table> LoadTable(std::string_view csv_bytes,
                                const Schema& schema);

// Serializes in schema column order. Reals use the shortest representation
// that round-trips.
std::string WriteCsv(const Table& table, bool include_provenance = false);

// Shortest round-trip decimal form of a double.
std::string FormatDouble(double value);

}  // namespace fedtab

#endif  // FEDTAB_CSV_IO_H_
