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

#ifndef FEDTAB_SYNTHESIS_H_
#define FEDTAB_SYNTHESIS_H_

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "absl/status/statusor.h"
#include "fedtab/table.h"
#include "fedtab/table_codec.h"

namespace fedtab {

inline constexpr size_t kSynthesisBlockRows = 4096;

struct SynthesisRequest {
  size_t num_rows = 0;
  uint64_t seed = 0;
  // Optional per-continuous-column [min, max] applied after decoding.
  std::vector<std::pair<double, double>> clip_ranges = {};
};

// X' = L U^T for L with i.i.d. standard normal entries. Rows are generated
// in blocks of kSynthesisBlockRows, block b drawing from
// Rng(MixSeed(seed, b)), so the output does not depend on scheduling.
Eigen::MatrixXd SampleCorrelated(const Eigen::MatrixXd& u, size_t num_rows,
                                 uint64_t seed);

// Samples encoded rows and decodes them through `codec`. Every output row
// is flagged synthetic.
absl::StatusOr<Table> Synthesize(const TableCodec& codec,
                                 const Eigen::MatrixXd& u,
                                 const SynthesisRequest& request);

// Local rows followed by synthetic rows, with provenance flags kept.
absl::StatusOr<Table> AugmentClient(const Table& local,
                                    const Table& synthetic);

}  // namespace fedtab

#endif  // FEDTAB_SYNTHESIS_H_
