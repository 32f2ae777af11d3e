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

#include "fedtab/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fedtab/csv_io.h"
#include "fedtab/random.h"
#include "json.hpp"

namespace fedtab {
namespace {

// Partial Fisher-Yates: the first `count` entries of a shuffled copy.
std::vector<double> Subsample(std::span<const double> values, size_t count,
                              uint64_t seed) {
  std::vector<double> out(values.begin(), values.end());
  Rng rng(seed);
  for (size_t i = 0; i < count; ++i) {
    const size_t j = i + rng.UniformInt(out.size() - i);
    std::swap(out[i], out[j]);
  }
  out.resize(count);
  return out;
}

}  // namespace

absl::StatusOr<double> ColumnJsd(std::span<const std::string> real,
                                 std::span<const std::string> synth) {
  if (real.empty() || synth.empty()) {
    return absl::InvalidArgumentError("JSD needs two nonempty columns");
  }
  std::map<std::string_view, std::pair<double, double>> counts;
  for (const std::string& s : real) counts[s].first += 1.0;
  for (const std::string& s : synth) counts[s].second += 1.0;
  const double np = static_cast<double>(real.size());
  const double nq = static_cast<double>(synth.size());
  double jsd = 0.0;
  for (const auto& [category, c] : counts) {
    const double p = c.first / np;
    const double q = c.second / nq;
    const double m = 0.5 * (p + q);
    if (p > 0.0) jsd += 0.5 * p * std::log2(p / m);
    if (q > 0.0) jsd += 0.5 * q * std::log2(q / m);
  }
  return std::clamp(jsd, 0.0, 1.0);
}

absl::StatusOr<double> ColumnWd(std::span<const double> real,
                                std::span<const double> synth, uint64_t seed) {
  if (real.empty() || synth.empty()) {
    return absl::InvalidArgumentError("WD needs two nonempty columns");
  }
  const auto [lo_it, hi_it] = std::minmax_element(real.begin(), real.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;

  const size_t n = std::min(real.size(), synth.size());
  std::vector<double> a = real.size() > n
                              ? Subsample(real, n, MixSeed(seed, 0))
                              : std::vector<double>(real.begin(), real.end());
  std::vector<double> b = synth.size() > n
                              ? Subsample(synth, n, MixSeed(seed, 1))
                              : std::vector<double>(synth.begin(), synth.end());
  auto scale = [&](double v) { return range > 0.0 ? (v - lo) / range : 0.0; };
  for (double& v : a) v = scale(v);
  for (double& v : b) v = scale(v);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) total += std::abs(a[i] - b[i]);
  return total / static_cast<double>(n);
}

absl::StatusOr<SimilarityReport> ComputeSimilarity(const Table& real,
                                                   const Table& synth,
                                                   uint64_t seed) {
  if (!(real.schema() == synth.schema())) {
    return absl::InvalidArgumentError(
        "similarity needs tables with the same schema");
  }
  const Schema& schema = real.schema();
  SimilarityReport report;
  double jsd_sum = 0.0, wd_sum = 0.0;
  size_t jsd_n = 0, wd_n = 0;
  for (size_t c = 0; c < schema.num_columns(); ++c) {
    const ColumnSpec& spec = schema.column(c);
    absl::StatusOr<double> score =
        spec.kind == ColumnKind::kContinuous
            ? ColumnWd(real.Continuous(c), synth.Continuous(c),
                       MixSeed(seed, c))
            : ColumnJsd(real.Discrete(c), synth.Discrete(c));
    if (!score.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "column '", spec.name, "': ", score.status().message()));
    }
    report.per_column.push_back({spec.name, spec.kind, *score});
    if (spec.kind == ColumnKind::kContinuous) {
      wd_sum += *score;
      ++wd_n;
    } else {
      jsd_sum += *score;
      ++jsd_n;
    }
  }
  if (jsd_n > 0) report.avg_jsd = jsd_sum / static_cast<double>(jsd_n);
  if (wd_n > 0) report.avg_wd = wd_sum / static_cast<double>(wd_n);
  return report;
}

std::string SimilarityReport::ToJson() const {
  nlohmann::ordered_json j;
  j["avg_jsd"] = avg_jsd.has_value() ? nlohmann::ordered_json(*avg_jsd)
                                     : nlohmann::ordered_json(nullptr);
  j["avg_wd"] = avg_wd.has_value() ? nlohmann::ordered_json(*avg_wd)
                                   : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json cols = nlohmann::ordered_json::array();
  for (const ColumnScore& s : per_column) {
    cols.push_back({{"column", s.column},
                    {"kind", std::string(ColumnKindName(s.kind))},
                    {"score", s.score}});
  }
  j["per_column"] = std::move(cols);
  return j.dump(2) + "\n";
}

std::string SimilarityReport::ToCsv() const {
  std::string out = "column,kind,score\n";
  for (const ColumnScore& s : per_column) {
    absl::StrAppend(&out, s.column, ",", std::string(ColumnKindName(s.kind)),
                    ",", FormatDouble(s.score), "\n");
  }
  return out;
}

}  // namespace fedtab
