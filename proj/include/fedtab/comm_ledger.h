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

#ifndef FEDTAB_COMM_LEDGER_H_
#define FEDTAB_COMM_LEDGER_H_

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"

namespace fedtab {

// Protocol phases. The first five carry the statistics the augmentation
// protocol adds on top of plain federated training; gmm_init (global column
// ranges) and vocabulary (category token discovery) are setup exchanges
// whose cost is token bytes or a handful of scalars.
enum class Phase {
  kGmmInit,
  kGmmRound,
  kVocabulary,
  kFrequency,
  kMoments,
  kCovarianceBroadcast,
  kModelRound,
};

enum class Direction { kUpload, kDownload };

std::string_view PhaseName(Phase phase);
std::string_view DirectionName(Direction direction);
std::optional<Phase> ParsePhase(std::string_view name);
std::optional<Direction> ParseDirection(std::string_view name);

// Scalars are 64-bit floats.
inline constexpr uint64_t kBytesPerScalar = 8;
// Per-message framing, accounted separately from the payload.
inline constexpr uint64_t kHeaderBytes = 16;

struct LedgerEntry {
  Phase phase;
  Direction direction;
  int client;
  uint64_t scalar_count = 0;
  uint64_t token_bytes = 0;  // UTF-8 length of category tokens carried

  uint64_t payload_bytes() const {
    return scalar_count * kBytesPerScalar + token_bytes;
  }
};

struct LedgerTotals {
  uint64_t messages = 0;
  uint64_t scalars = 0;
  uint64_t token_bytes = 0;
  uint64_t payload_bytes = 0;
  uint64_t header_bytes = 0;

  LedgerTotals& operator+=(const LedgerTotals& other);
  friend bool operator==(const LedgerTotals&, const LedgerTotals&) = default;
};

struct LedgerSummary {
  std::map<std::pair<Phase, Direction>, LedgerTotals> by_phase;
  LedgerTotals upload;
  LedgerTotals download;

  LedgerTotals Get(Phase phase, Direction direction) const;
};

// Append-only, thread-safe record of simulated transfers.
class CommLedger {
 public:
  CommLedger() = default;
  CommLedger(const CommLedger& other);
  CommLedger& operator=(const CommLedger& other);

  void Record(Phase phase, Direction direction, int client,
              uint64_t scalar_count, uint64_t token_bytes = 0);

  std::vector<LedgerEntry> Snapshot() const;
  LedgerSummary Summarize() const;
  // Columns: phase,direction,client,scalars,token_bytes,payload_bytes
  std::string ToCsv() const;
  // Inverse of ToCsv.
  static absl::StatusOr<CommLedger> FromCsv(std::string_view csv);

 private:
  mutable std::mutex mu_;
  std::vector<LedgerEntry> entries_;
};

// Run dimensions that the closed-form cost model is evaluated on.
struct CostModelInputs {
  int num_clients = 0;           // K
  int num_continuous = 0;        // n_c
  int num_discrete = 0;          // n_d
  double avg_categories = 0.0;   // p, mean categories per discrete column
  double avg_modes = 0.0;        // t, mean mixture modes per continuous column
  double gmm_rounds = 0.0;       // m, federated VB-GMM rounds
  // Per-column (modes, rounds). When present, the GMM terms are summed per
  // column, which equals the averaged formula when all columns agree.
  std::vector<std::pair<int, int>> gmm_columns;
};

// Closed-form scalar counts of the statistics exchange, in total over all
// clients.
struct ClosedFormCosts {
  double frequency_upload = 0;    // K * n_d * p
  double frequency_download = 0;  // K * n_d * p
  double gmm_upload = 0;          // K * (3t + 2) * n_c * m
  double gmm_download = 0;        // K * (6t + 1) * n_c * m
  double moments_upload = 0;      // K * l * (l + 1)
  double covariance_download = 0; // K * l^2
  double total_upload = 0;
  double total_download = 0;
};

ClosedFormCosts EvaluateClosedForm(const CostModelInputs& inputs);

}  // namespace fedtab

#endif  // FEDTAB_COMM_LEDGER_H_
