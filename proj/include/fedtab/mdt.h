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

#ifndef FEDTAB_MDT_H_
#define FEDTAB_MDT_H_

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "fedtab/icdm.h"
#include "fedtab/random.h"
#include "fedtab/vb_gmm.h"

namespace fedtab {

enum class ModePolicy { kSampleResponsibility, kArgmax };

std::string_view ModePolicyName(ModePolicy policy);
std::optional<ModePolicy> ParseModePolicy(std::string_view name);

struct MdtMode {
  double pi = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
};

// Multimodal distribution transformation for one continuous column: a value
// becomes a per-mode z-score `a` and the index of the mode it was assigned
// to. The mode index is itself categorical; `mode_codec()` is its ICDM codec
// with the mixture weights as frequencies and tokens "0", "1", ....
class MdtCodec {
 public:
  struct Encoded {
    double a = 0.0;
    size_t mode = 0;
  };

  static absl::StatusOr<MdtCodec> Create(
      std::vector<MdtMode> modes,
      ModePolicy policy = ModePolicy::kSampleResponsibility,
      double lambda = IcdmCodec::kDefaultLambda, double sigma_floor = 1e-6);
  static absl::StatusOr<MdtCodec> FromPosterior(
      const GmmPosterior& posterior,
      ModePolicy policy = ModePolicy::kSampleResponsibility,
      double lambda = IcdmCodec::kDefaultLambda, double sigma_floor = 1e-6);

  const std::vector<MdtMode>& modes() const { return modes_; }
  size_t num_modes() const { return modes_.size(); }
  ModePolicy policy() const { return policy_; }
  const IcdmCodec& mode_codec() const { return mode_codec_; }

  // Posterior mode probabilities of `value` under the mixture.
  std::vector<double> Responsibilities(double value) const;
  absl::StatusOr<Encoded> Encode(double value, Rng& rng) const;
  absl::StatusOr<double> Decode(double a, size_t mode) const;
  // Mode index carried by an ICDM-encoded indicator value.
  size_t DecodeModeIndicator(double value) const {
    return indicator_to_mode_[mode_codec_.DecodeIndex(value)];
  }
  double EncodeModeIndicator(size_t mode, Rng& rng) const {
    return mode_codec_.EncodeIndex(mode_to_indicator_[mode], rng);
  }

 private:
  MdtCodec(std::vector<MdtMode> modes, ModePolicy policy, IcdmCodec mode_codec);

  std::vector<MdtMode> modes_;
  ModePolicy policy_;
  IcdmCodec mode_codec_;
  std::vector<size_t> mode_to_indicator_;
  std::vector<size_t> indicator_to_mode_;
};

}  // namespace fedtab

#endif  // FEDTAB_MDT_H_
