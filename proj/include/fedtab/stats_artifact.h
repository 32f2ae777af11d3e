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

#ifndef FEDTAB_STATS_ARTIFACT_H_
#define FEDTAB_STATS_ARTIFACT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "fedtab/covariance.h"
#include "fedtab/icdm.h"
#include "fedtab/mdt.h"
#include "fedtab/table.h"
#include "fedtab/table_codec.h"
#include "fedtab/vb_gmm.h"

namespace fedtab {

struct GmmColumnFit {
  std::string column;
  GmmPosterior posterior;
  int initial_modes = 0;  // modes exchanged during the rounds
  int rounds = 0;        // summed over all starts
  int chosen_init = 0;
  bool converged = false;
  double final_elbo = 0.0;
  double data_min = 0.0;
  double data_max = 0.0;
};

struct DpSettings {
  std::optional<double> epsilon;  // absent means no noise
  double delta = 1e-4;
  double sensitivity = 2.0;
  uint64_t seed = 0;
};

// Everything a client needs to synthesize: global mixtures, category
// codecs, the (possibly noised) covariance and its factor. The mode
// indicator codecs are not stored; they are rebuilt from the mixtures.
struct StatsArtifact {
  static constexpr std::string_view kVersion = "fedtab-stats/1";

  Schema schema;
  double lambda = IcdmCodec::kDefaultLambda;
  ModePolicy mode_policy = ModePolicy::kSampleResponsibility;
  double sigma_floor = 1e-6;
  std::vector<GmmColumnFit> gmm = {};  // schema.continuous_indices() order
  std::vector<IcdmCodec> icdm = {};    // schema.discrete_indices() order
  GlobalCovariance covariance = {};
  DpSettings dp = {};
  CholFactor factor = {};
  uint64_t seed = 0;
  std::vector<size_t> client_rows = {};

  absl::StatusOr<TableCodec> BuildCodec() const;
  // Global [min, max] of each continuous column.
  std::vector<std::pair<double, double>> ContinuousRanges() const;

  std::string ToJson() const;
  static absl::StatusOr<StatsArtifact> FromJson(std::string_view json);
};

}  // namespace fedtab

#endif  // FEDTAB_STATS_ARTIFACT_H_
