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

#ifndef FEDTAB_PIPELINE_H_
#define FEDTAB_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "fedtab/comm_ledger.h"
#include "fedtab/fed_train.h"
#include "fedtab/federation.h"
#include "fedtab/metrics.h"
#include "fedtab/stats_artifact.h"
#include "fedtab/table.h"

namespace fedtab {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct PipelineConfig {
  std::filesystem::path data_path;
  std::filesystem::path schema_path;
  std::filesystem::path output_dir;
  uint64_t seed = 0;
  double test_fraction = 0.2;
  int num_clients = 5;
  double beta = 0.5;
  FitSettings fit;  // seeds inside are overwritten from `seed`
  std::optional<size_t> synthetic_rows;  // per client; default is N_k
  bool clip_synthetic = false;
  TrainConfig train;

  // Relative paths resolve against `base_dir`. Unknown keys are rejected.
  static absl::StatusOr<PipelineConfig> FromJson(
      std::string_view json, const std::filesystem::path& base_dir);
  static absl::StatusOr<PipelineConfig> Load(const std::filesystem::path& path);
  std::string ToJson() const;
};

// Independent streams for each stage, all derived from the run seed.
struct StageSeeds {
  uint64_t split, partition, fit, dp, synthesis, train, similarity;
  static StageSeeds Derive(uint64_t seed);
};

// Client k draws from MixSeed(seed, k).
absl::StatusOr<std::vector<Table>> SynthesizeClients(
    const StatsArtifact& artifact, std::span<const size_t> rows,
    uint64_t seed, bool clip);

// Continuous features scaled by the global mixture moments, categories
// from the global codecs.
absl::StatusOr<Featurizer> FeaturizerFromArtifact(const StatsArtifact& artifact);

struct EvaluationResult {
  SimilarityReport similarity;
  TrainResult raw;
  TrainResult augmented;
};

// Trains FedAvg on the raw shards and on shards unioned with their
// synthetic tables. Model exchanges of the augmented run are recorded.
absl::StatusOr<EvaluationResult> EvaluateAugmentation(
    const StatsArtifact& artifact, std::span<const Table> shards,
    std::span<const Table> synthetic, const Table& test,
    const TrainConfig& train, uint64_t similarity_seed,
    CommLedger* ledger = nullptr);

struct CostComparison {
  Phase phase;
  Direction direction;
  uint64_t measured = 0;
  double closed_form = 0.0;
};

// Measured scalar totals next to the closed-form counts for the phases the
// closed form covers.
std::vector<CostComparison> CompareWithClosedForm(
    const LedgerSummary& summary, const StatsArtifact& artifact);

// File-based stages; each reads the previous stage's outputs from
// `config.output_dir`.
absl::Status RunPartitionStage(const PipelineConfig& config);
absl::Status RunFitStage(const PipelineConfig& config);
absl::Status RunSynthesizeStage(const PipelineConfig& config);
absl::Status RunEvaluateStage(const PipelineConfig& config);
absl::Status RunPipeline(const PipelineConfig& config);

}  // namespace fedtab

#endif  // FEDTAB_PIPELINE_H_
