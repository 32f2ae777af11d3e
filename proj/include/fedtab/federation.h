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

#ifndef FEDTAB_FEDERATION_H_
#define FEDTAB_FEDERATION_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "fedtab/comm_ledger.h"
#include "fedtab/covariance.h"
#include "fedtab/stats_artifact.h"
#include "fedtab/table.h"
#include "fedtab/table_codec.h"
#include "fedtab/vb_gmm.h"

namespace fedtab {

// Per-category row counts for one discrete column, in the order of the
// global vocabulary they were counted against.
struct CategoryCounts {
  std::vector<double> counts;
};

// Column i of the mixture phase is fitted with MixSeed(seed, kGmmSeedTag + i)
// and client k encodes its rows with MixSeed(seed, kEncodeSeedTag + k).
inline constexpr uint64_t kGmmSeedTag = 0x100;
inline constexpr uint64_t kEncodeSeedTag = 0x200;

struct FitSettings {
  GmmPrior prior = GmmPrior::Default(10);
  double lambda = IcdmCodec::kDefaultLambda;
  ModePolicy mode_policy = ModePolicy::kSampleResponsibility;
  DpSettings dp;
  bool clamp_covariance = true;
  uint64_t seed = 0;
};

// A client holds its rows privately and answers the server's requests with
// statistics only.
class ClientContext {
 public:
  ClientContext(int id, Table table) : id_(id), table_(std::move(table)) {}

  int id() const { return id_; }
  size_t num_rows() const { return table_.num_rows(); }
  const Table& table() const { return table_; }

  GmmClientSession OpenGmmSession(size_t continuous_index) const;
  // Distinct categories of one discrete column, sorted.
  std::vector<std::string> LocalVocabulary(size_t discrete_index) const;
  CategoryCounts CountCategories(size_t discrete_index,
                                 std::span<const std::string> vocabulary) const;
  // Encodes the local rows and returns their moments. Zero-row clients
  // report an empty message.
  absl::StatusOr<LocalMoments> ComputeMoments(const TableCodec& codec,
                                              uint64_t seed) const;

 private:
  int id_;
  Table table_;
};

// The server only ever handles the statistics types above.
class ServerContext {
 public:
  explicit ServerContext(Schema schema, FitSettings settings,
                         CommLedger* ledger = nullptr)
      : schema_(std::move(schema)), settings_(settings), ledger_(ledger) {}

  absl::StatusOr<GmmColumnFit> FitColumn(
      size_t continuous_index, std::span<GmmClientSession* const> sessions);
  std::vector<std::string> MergeVocabularies(
      std::span<const std::vector<std::string>> local);
  absl::StatusOr<IcdmCodec> BuildCategoryCodec(
      std::span<const std::string> vocabulary,
      std::span<const CategoryCounts> counts);
  // Aggregates, clamps and noises the covariance, then factors it.
  absl::StatusOr<std::pair<GlobalCovariance, CholFactor>> MergeMoments(
      std::span<const LocalMoments> moments);

 private:
  Schema schema_;
  FitSettings settings_;
  CommLedger* ledger_;
};

// Runs every statistics phase across the clients and assembles the
// artifact. Clients with zero rows take part but contribute nothing.
absl::StatusOr<StatsArtifact> RunFederatedFit(
    std::span<const ClientContext> clients, const Schema& schema,
    const FitSettings& settings, CommLedger* ledger = nullptr);

}  // namespace fedtab

#endif  // FEDTAB_FEDERATION_H_
