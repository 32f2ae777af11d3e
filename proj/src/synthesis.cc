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

#include "fedtab/synthesis.h"

#include <algorithm>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fedtab/random.h"

namespace fedtab {

Eigen::MatrixXd SampleCorrelated(const Eigen::MatrixXd& u, size_t num_rows,
                                 uint64_t seed) {
  const Eigen::Index l = u.rows();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(num_rows), l);
  Eigen::MatrixXd noise;
  for (size_t start = 0, block = 0; start < num_rows;
       start += kSynthesisBlockRows, ++block) {
    const size_t rows = std::min(kSynthesisBlockRows, num_rows - start);
    Rng rng(MixSeed(seed, block));
    noise.resize(static_cast<Eigen::Index>(rows), l);
    for (size_t r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < l; ++c) {
        noise(static_cast<Eigen::Index>(r), c) = rng.Normal();
      }
    }
    out.middleRows(static_cast<Eigen::Index>(start),
                   static_cast<Eigen::Index>(rows)) =
        noise * u.transpose().triangularView<Eigen::Upper>();
  }
  return out;
}

absl::StatusOr<Table> Synthesize(const TableCodec& codec,
                                 const Eigen::MatrixXd& u,
                                 const SynthesisRequest& request) {
  const auto l = static_cast<Eigen::Index>(codec.width());
  if (u.rows() != l || u.cols() != l) {
    return absl::FailedPreconditionError(absl::StrCat(
        "factor is ", u.rows(), "x", u.cols(), " but the layout has width ",
        l));
  }
  const Eigen::MatrixXd encoded =
      SampleCorrelated(u, request.num_rows, request.seed);
  absl::StatusOr<Table> decoded = codec.Decode(
      encoded, request.clip_ranges.empty() ? nullptr : &request.clip_ranges);
  if (!decoded.ok()) return decoded.status();
  return Table::Create(decoded->schema(), decoded->columns(),
                       std::vector<uint8_t>(request.num_rows, 1));
}

absl::StatusOr<Table> AugmentClient(const Table& local,
                                    const Table& synthetic) {
  if (!(local.schema() == synthetic.schema())) {
    return absl::InvalidArgumentError(
        "synthetic table schema does not match the local table");
  }
  const Table parts[] = {local, synthetic};
  return ConcatTables(parts);
}

}  // namespace fedtab
