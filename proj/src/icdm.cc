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

#include "fedtab/icdm.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fedtab/normal_dist.h"

namespace fedtab {
namespace {

constexpr double kFrequencySumTolerance = 1e-6;

absl::Status ValidateLambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 0.5)) {
    return absl::InvalidArgumentError(
        absl::StrCat("ICDM lambda must be in (0, 0.5), got ", lambda));
  }
  return absl::OkStatus();
}

}  // namespace

IcdmCodec::IcdmCodec(std::vector<IcdmEntry> entries, double lambda)
    : entries_(std::move(entries)), lambda_(lambda) {
  value_bounds_.reserve(entries_.size() + 1);
  value_bounds_.push_back(NormalQuantile(entries_.front().q_low));
  for (size_t i = 0; i < entries_.size(); ++i) {
    value_bounds_.push_back(NormalQuantile(entries_[i].q_high));
    index_.emplace(entries_[i].category, i);
  }
}

absl::StatusOr<IcdmCodec> IcdmCodec::Build(
    std::vector<std::pair<std::string, double>> frequencies, double lambda) {
  if (absl::Status s = ValidateLambda(lambda); !s.ok()) return s;
  if (frequencies.empty()) {
    return absl::InvalidArgumentError("ICDM needs at least one category");
  }
  double total = 0.0;
  for (const auto& [category, p] : frequencies) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "category '", category, "' has non-positive frequency ", p));
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kFrequencySumTolerance) {
    return absl::InvalidArgumentError(
        absl::StrCat("category frequencies sum to ", total, ", expected 1"));
  }
  std::sort(frequencies.begin(), frequencies.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second < b.second;
              return a.first < b.first;
            });
  {
    std::vector<std::string> names;
    names.reserve(frequencies.size());
    for (const auto& f : frequencies) names.push_back(f.first);
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
      return absl::InvalidArgumentError("duplicate category in frequencies");
    }
  }

  const double span = 1.0 - 2.0 * lambda;
  std::vector<IcdmEntry> entries;
  entries.reserve(frequencies.size());
  double cumulative = 0.0;
  double q = lambda;
  for (size_t i = 0; i < frequencies.size(); ++i) {
    IcdmEntry entry;
    entry.category = std::move(frequencies[i].first);
    entry.frequency = frequencies[i].second / total;
    entry.q_low = q;
    cumulative += entry.frequency;
    q = i + 1 == frequencies.size() ? 1.0 - lambda
                                    : lambda + span * cumulative;
    entry.q_high = q;
    entries.push_back(std::move(entry));
  }
  return IcdmCodec(std::move(entries), lambda);
}

absl::StatusOr<IcdmCodec> IcdmCodec::FromEntries(std::vector<IcdmEntry> entries,
                                                 double lambda) {
  if (absl::Status s = ValidateLambda(lambda); !s.ok()) return s;
  if (entries.empty()) {
    return absl::InvalidArgumentError("ICDM needs at least one category");
  }
  if (entries.front().q_low != lambda || entries.back().q_high != 1.0 - lambda) {
    return absl::InvalidArgumentError(
        "ICDM slices must start at lambda and end at 1 - lambda");
  }
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!(entries[i].q_high > entries[i].q_low) ||
        (i > 0 && entries[i].q_low != entries[i - 1].q_high)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "ICDM slice for '", entries[i].category, "' is empty or not "
          "contiguous with its predecessor"));
    }
  }
  IcdmCodec codec(std::move(entries), lambda);
  if (codec.index_.size() != codec.entries_.size()) {
    return absl::InvalidArgumentError("duplicate category in ICDM entries");
  }
  return codec;
}

std::optional<size_t> IcdmCodec::IndexOf(std::string_view category) const {
  auto it = index_.find(category);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

absl::StatusOr<double> IcdmCodec::Encode(std::string_view category,
                                         Rng& rng) const {
  std::optional<size_t> index = IndexOf(category);
  if (!index.has_value()) {
    return absl::NotFoundError(
        absl::StrCat("unknown category '", std::string(category), "'"));
  }
  return EncodeIndex(*index, rng);
}

double IcdmCodec::EncodeIndex(size_t index, Rng& rng) const {
  const IcdmEntry& entry = entries_[index];
  const double u = rng.Uniform(entry.q_low, entry.q_high);
  double value = NormalQuantile(u);
  // Keep the value strictly inside its slice's image so decoding recovers
  // the category regardless of rounding in the quantile function.
  const double lo = value_bounds_[index];
  const double hi = value_bounds_[index + 1];
  if (value < lo) value = lo;
  if (index + 1 < entries_.size() && value >= hi) {
    value = std::nextafter(hi, -std::numeric_limits<double>::infinity());
  }
  return value;
}

size_t IcdmCodec::DecodeIndex(double value) const {
  // Inner boundaries are value_bounds_[1 .. M-1].
  auto first = value_bounds_.begin() + 1;
  auto last = value_bounds_.end() - 1;
  return static_cast<size_t>(std::upper_bound(first, last, value) - first);
}

}  // namespace fedtab
