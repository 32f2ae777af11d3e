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

#ifndef FEDTAB_ICDM_H_
#define FEDTAB_ICDM_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "fedtab/random.h"

namespace fedtab {

struct IcdmEntry {
  std::string category;
  double frequency = 0.0;
  double q_low = 0.0;   // cumulative probability, inclusive
  double q_high = 0.0;  // cumulative probability, exclusive

  friend bool operator==(const IcdmEntry&, const IcdmEntry&) = default;
};

// Inverse cumulative distribution mapping for one categorical column.
//
// Categories are ordered by ascending global frequency (ties broken by
// token) and assigned consecutive slices of [lambda, 1 - lambda] whose
// widths are proportional to their frequencies. A category is encoded as
// the standard-normal quantile of a probability drawn uniformly from its
// slice, so the encoded column is standard normal truncated to
// [F^-1(lambda), F^-1(1 - lambda)].
class IcdmCodec {
 public:
  static constexpr double kDefaultLambda = 1e-4;

  // `frequencies` must be positive and sum to 1 within 1e-6; they are
  // renormalized before use.
  static absl::StatusOr<IcdmCodec> Build(
      std::vector<std::pair<std::string, double>> frequencies,
      double lambda = kDefaultLambda);
  // Rebuilds a codec from serialized entries, validating that they tile
  // [lambda, 1 - lambda] in order.
  static absl::StatusOr<IcdmCodec> FromEntries(std::vector<IcdmEntry> entries,
                                               double lambda);

  const std::vector<IcdmEntry>& entries() const { return entries_; }
  size_t num_categories() const { return entries_.size(); }
  double lambda() const { return lambda_; }
  std::optional<size_t> IndexOf(std::string_view category) const;

  absl::StatusOr<double> Encode(std::string_view category, Rng& rng) const;
  double EncodeIndex(size_t index, Rng& rng) const;
  // Total: values below the first slice map to the first category, values
  // above the last slice to the last one.
  size_t DecodeIndex(double value) const;
  const std::string& Decode(double value) const {
    return entries_[DecodeIndex(value)].category;
  }

  // Value-space image of entry i's slice.
  double ValueLow(size_t i) const { return value_bounds_[i]; }
  double ValueHigh(size_t i) const { return value_bounds_[i + 1]; }

 private:
  IcdmCodec(std::vector<IcdmEntry> entries, double lambda);

  std::vector<IcdmEntry> entries_;
  double lambda_ = kDefaultLambda;
  std::vector<double> value_bounds_;  // F^-1 of the M + 1 slice boundaries
  std::map<std::string, size_t, std::less<>> index_;
};

}  // namespace fedtab

#endif  // FEDTAB_ICDM_H_
