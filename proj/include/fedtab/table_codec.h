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

#ifndef FEDTAB_TABLE_CODEC_H_
#define FEDTAB_TABLE_CODEC_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "absl/status/statusor.h"
#include "fedtab/icdm.h"
#include "fedtab/mdt.h"
#include "fedtab/table.h"

namespace fedtab {

enum class SlotKind { kModeValue, kModeIndicator, kCategory };

std::string_view SlotKindName(SlotKind kind);

// One column of the encoded matrix.
struct LayoutSlot {
  SlotKind kind = SlotKind::kModeValue;
  size_t schema_column = 0;

  friend bool operator==(const LayoutSlot&, const LayoutSlot&) = default;
};

// Encodes whole tables into the dense representation
//   [a_1, b_1, ..., a_nc, b_nc, d_1, ..., d_nd]
// where (a_i, b_i) is the MDT pair of the i-th continuous column (b being the
// ICDM-encoded mode index) and d_j is the ICDM code of the j-th discrete
// column. Columns follow schema order within each group.
class TableCodec {
 public:
  // `mdt` and `icdm` are indexed like schema.continuous_indices() and
  // schema.discrete_indices().
  static absl::StatusOr<TableCodec> Create(Schema schema,
                                           std::vector<MdtCodec> mdt,
                                           std::vector<IcdmCodec> icdm);

  const Schema& schema() const { return schema_; }
  const std::vector<MdtCodec>& mdt() const { return mdt_; }
  const std::vector<IcdmCodec>& icdm() const { return icdm_; }
  const std::vector<LayoutSlot>& layout() const { return layout_; }
  size_t width() const { return layout_.size(); }

  // Row i draws its randomness from Rng(MixSeed(seed, i)).
  absl::StatusOr<Eigen::MatrixXd> Encode(const Table& table,
                                         uint64_t seed) const;
  // `clip_ranges`, when given, holds one [min, max] per continuous column.
  absl::StatusOr<Table> Decode(
      const Eigen::MatrixXd& encoded,
      const std::vector<std::pair<double, double>>* clip_ranges =
          nullptr) const;

 private:
  TableCodec(Schema schema, std::vector<MdtCodec> mdt,
             std::vector<IcdmCodec> icdm);

  Schema schema_;
  std::vector<MdtCodec> mdt_;
  std::vector<IcdmCodec> icdm_;
  std::vector<LayoutSlot> layout_;
};

}  // namespace fedtab

#endif  // FEDTAB_TABLE_CODEC_H_
