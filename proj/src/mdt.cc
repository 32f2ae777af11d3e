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

#include "fedtab/mdt.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fedtab {

std::string_view ModePolicyName(ModePolicy policy) {
  switch (policy) {
    case ModePolicy::kSampleResponsibility:
      return "sample";
    case ModePolicy::kArgmax:
      return "argmax";
  }
  return "unknown";
}

std::optional<ModePolicy> ParseModePolicy(std::string_view name) {
  if (name == "sample") return ModePolicy::kSampleResponsibility;
  if (name == "argmax") return ModePolicy::kArgmax;
  return std::nullopt;
}

MdtCodec::MdtCodec(std::vector<MdtMode> modes, ModePolicy policy,
                   IcdmCodec mode_codec)
    : modes_(std::move(modes)),
      policy_(policy),
      mode_codec_(std::move(mode_codec)),
      mode_to_indicator_(modes_.size()),
      indicator_to_mode_(modes_.size()) {
  for (size_t i = 0; i < mode_codec_.num_categories(); ++i) {
    const size_t mode = std::stoul(mode_codec_.entries()[i].category);
    indicator_to_mode_[i] = mode;
    mode_to_indicator_[mode] = i;
  }
}

absl::StatusOr<MdtCodec> MdtCodec::Create(std::vector<MdtMode> modes,
                                          ModePolicy policy, double lambda,
                                          double sigma_floor) {
  if (modes.empty()) {
    return absl::InvalidArgumentError("MDT needs at least one mode");
  }
  double total = 0.0;
  for (size_t t = 0; t < modes.size(); ++t) {
    const MdtMode& mode = modes[t];
    if (!(mode.pi > 0.0) || !std::isfinite(mode.pi) ||
        !std::isfinite(mode.mu) || !std::isfinite(mode.sigma) ||
        mode.sigma < 0.0) {
      return absl::InvalidArgumentError(
          absl::StrCat("invalid parameters for mode ", t));
    }
    total += mode.pi;
  }
  std::vector<std::pair<std::string, double>> frequencies;
  frequencies.reserve(modes.size());
  for (size_t t = 0; t < modes.size(); ++t) {
    modes[t].pi /= total;
    modes[t].sigma = std::max(modes[t].sigma, sigma_floor);
    frequencies.emplace_back(std::to_string(t), modes[t].pi);
  }
  absl::StatusOr<IcdmCodec> codec =
      IcdmCodec::Build(std::move(frequencies), lambda);
  if (!codec.ok()) return codec.status();
  return MdtCodec(std::move(modes), policy, *std::move(codec));
}

absl::StatusOr<MdtCodec> MdtCodec::FromPosterior(const GmmPosterior& posterior,
                                                 ModePolicy policy,
                                                 double lambda,
                                                 double sigma_floor) {
  std::vector<MdtMode> modes;
  modes.reserve(posterior.modes.size());
  for (const GmmMode& mode : posterior.modes) {
    modes.push_back({mode.pi, mode.mu, mode.sigma});
  }
  return Create(std::move(modes), policy, lambda, sigma_floor);
}

std::vector<double> MdtCodec::Responsibilities(double value) const {
  std::vector<double> log_r(modes_.size());
  double max_log = -std::numeric_limits<double>::infinity();
  for (size_t t = 0; t < modes_.size(); ++t) {
    const double z = (value - modes_[t].mu) / modes_[t].sigma;
    log_r[t] = std::log(modes_[t].pi) - std::log(modes_[t].sigma) - 0.5 * z * z;
    max_log = std::max(max_log, log_r[t]);
  }
  double sum = 0.0;
  for (double& r : log_r) {
    r = std::exp(r - max_log);
    sum += r;
  }
  for (double& r : log_r) r /= sum;
  return log_r;
}

absl::StatusOr<MdtCodec::Encoded> MdtCodec::Encode(double value,
                                                   Rng& rng) const {
  if (!std::isfinite(value)) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot encode non-finite value ", value));
  }
  const std::vector<double> resp = Responsibilities(value);
  size_t mode = 0;
  if (policy_ == ModePolicy::kArgmax) {
    mode = static_cast<size_t>(std::max_element(resp.begin(), resp.end()) -
                               resp.begin());
  } else {
    const double u = rng.Uniform();
    double cumulative = 0.0;
    mode = resp.size() - 1;
    for (size_t t = 0; t < resp.size(); ++t) {
      cumulative += resp[t];
      if (u < cumulative) {
        mode = t;
        break;
      }
    }
  }
  return Encoded{(value - modes_[mode].mu) / modes_[mode].sigma, mode};
}

absl::StatusOr<double> MdtCodec::Decode(double a, size_t mode) const {
  if (mode >= modes_.size()) {
    return absl::OutOfRangeError(absl::StrCat(
        "mode ", mode, " out of range for ", modes_.size(), " modes"));
  }
  return a * modes_[mode].sigma + modes_[mode].mu;
}

}  // namespace fedtab
