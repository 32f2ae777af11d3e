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

#include "fedtab/comm_ledger.h"

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "fedtab/csv_io.h"

namespace fedtab {

std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kGmmInit:
      return "gmm_init";
    case Phase::kGmmRound:
      return "gmm_round";
    case Phase::kVocabulary:
      return "vocabulary";
    case Phase::kFrequency:
      return "frequency";
    case Phase::kMoments:
      return "moments";
    case Phase::kCovarianceBroadcast:
      return "covariance_broadcast";
    case Phase::kModelRound:
      return "model_round";
  }
  return "unknown";
}

std::string_view DirectionName(Direction direction) {
  return direction == Direction::kUpload ? "upload" : "download";
}

std::optional<Phase> ParsePhase(std::string_view name) {
  for (Phase p : {Phase::kGmmInit, Phase::kGmmRound, Phase::kVocabulary,
                  Phase::kFrequency, Phase::kMoments,
                  Phase::kCovarianceBroadcast, Phase::kModelRound}) {
    if (PhaseName(p) == name) return p;
  }
  return std::nullopt;
}

std::optional<Direction> ParseDirection(std::string_view name) {
  if (name == "upload") return Direction::kUpload;
  if (name == "download") return Direction::kDownload;
  return std::nullopt;
}

LedgerTotals& LedgerTotals::operator+=(const LedgerTotals& other) {
  messages += other.messages;
  scalars += other.scalars;
  token_bytes += other.token_bytes;
  payload_bytes += other.payload_bytes;
  header_bytes += other.header_bytes;
  return *this;
}

LedgerTotals LedgerSummary::Get(Phase phase, Direction direction) const {
  auto it = by_phase.find({phase, direction});
  return it == by_phase.end() ? LedgerTotals{} : it->second;
}

CommLedger::CommLedger(const CommLedger& other) {
  std::lock_guard<std::mutex> lock(other.mu_);
  entries_ = other.entries_;
}

CommLedger& CommLedger::operator=(const CommLedger& other) {
  if (this == &other) return *this;
  std::vector<LedgerEntry> copy = other.Snapshot();
  std::lock_guard<std::mutex> lock(mu_);
  entries_ = std::move(copy);
  return *this;
}

void CommLedger::Record(Phase phase, Direction direction, int client,
                        uint64_t scalar_count, uint64_t token_bytes) {
  std::lock_guard<std::mutex> lock(mu_);
  entries_.push_back({phase, direction, client, scalar_count, token_bytes});
}

std::vector<LedgerEntry> CommLedger::Snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

LedgerSummary CommLedger::Summarize() const {
  LedgerSummary summary;
  for (const LedgerEntry& e : Snapshot()) {
    LedgerTotals t;
    t.messages = 1;
    t.scalars = e.scalar_count;
    t.token_bytes = e.token_bytes;
    t.payload_bytes = e.payload_bytes();
    t.header_bytes = kHeaderBytes;
    summary.by_phase[{e.phase, e.direction}] += t;
    (e.direction == Direction::kUpload ? summary.upload : summary.download) +=
        t;
  }
  return summary;
}

std::string CommLedger::ToCsv() const {
  std::string out = "phase,direction,client,scalars,token_bytes,payload_bytes\n";
  for (const LedgerEntry& e : Snapshot()) {
    absl::StrAppend(&out, std::string(PhaseName(e.phase)), ",",
                    std::string(DirectionName(e.direction)),
                    ",", e.client, ",", e.scalar_count, ",", e.token_bytes,
                    ",", e.payload_bytes(), "\n");
  }
  return out;
}

absl::StatusOr<CommLedger> CommLedger::FromCsv(std::string_view csv) {
  absl::StatusOr<std::vector<std::vector<std::string>>> records = ParseCsv(csv);
  if (!records.ok()) return records.status();
  if (records->empty() ||
      absl::StrJoin(records->front(), ",") !=
          "phase,direction,client,scalars,token_bytes,payload_bytes") {
    return absl::InvalidArgumentError("ledger CSV has an unexpected header");
  }
  CommLedger ledger;
  for (size_t i = 1; i < records->size(); ++i) {
    const std::vector<std::string>& r = (*records)[i];
    std::optional<Phase> phase = r.size() == 6 ? ParsePhase(r[0]) : std::nullopt;
    std::optional<Direction> direction =
        r.size() == 6 ? ParseDirection(r[1]) : std::nullopt;
    int client = 0;
    uint64_t scalars = 0, token_bytes = 0;
    if (!phase || !direction || !absl::SimpleAtoi(r[2], &client) ||
        !absl::SimpleAtoi(r[3], &scalars) ||
        !absl::SimpleAtoi(r[4], &token_bytes)) {
      return absl::InvalidArgumentError(
          absl::StrCat("ledger CSV row ", i, " is malformed"));
    }
    ledger.Record(*phase, *direction, client, scalars, token_bytes);
  }
  return ledger;
}

ClosedFormCosts EvaluateClosedForm(const CostModelInputs& in) {
  const double k = in.num_clients;
  const double nc = in.num_continuous;
  const double nd = in.num_discrete;
  const double l = 2.0 * nc + nd;
  ClosedFormCosts out;
  out.frequency_upload = k * nd * in.avg_categories;
  out.frequency_download = k * nd * in.avg_categories;
  if (in.gmm_columns.empty()) {
    out.gmm_upload = k * (3.0 * in.avg_modes + 2.0) * nc * in.gmm_rounds;
    out.gmm_download = k * (6.0 * in.avg_modes + 1.0) * nc * in.gmm_rounds;
  } else {
    for (const auto& [modes, rounds] : in.gmm_columns) {
      out.gmm_upload += k * (3.0 * modes + 2.0) * rounds;
      out.gmm_download += k * (6.0 * modes + 1.0) * rounds;
    }
  }
  out.moments_upload = k * l * (l + 1.0);
  out.covariance_download = k * l * l;
  out.total_upload = out.frequency_upload + out.gmm_upload + out.moments_upload;
  out.total_download =
      out.frequency_download + out.gmm_download + out.covariance_download;
  return out;
}

}  // namespace fedtab
