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

#include "fedtab/stats_artifact.h"

#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace fedtab {
namespace {

using Json = nlohmann::ordered_json;

Json MatrixToJson(const Eigen::MatrixXd& m) {
  Json values = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) values.push_back(m(i, j));
  }
  return values;
}

Eigen::MatrixXd MatrixFromJson(const Json& values, Eigen::Index rows,
                               Eigen::Index cols) {
  if (!values.is_array() ||
      values.size() != static_cast<size_t>(rows * cols)) {
    throw std::invalid_argument(absl::StrCat(
        "expected a row-major array of ", rows * cols, " numbers"));
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = values.at(static_cast<size_t>(i * cols + j)).get<double>();
    }
  }
  return m;
}

Json ModeToJson(const GmmMode& mode) {
  return {{"alpha", mode.alpha}, {"beta", mode.beta}, {"nu", mode.nu},
          {"m", mode.m},         {"w", mode.w},       {"pi", mode.pi},
          {"mu", mode.mu},       {"sigma", mode.sigma}};
}

GmmMode ModeFromJson(const Json& j) {
  GmmMode mode;
  mode.alpha = j.at("alpha").get<double>();
  mode.beta = j.at("beta").get<double>();
  mode.nu = j.at("nu").get<double>();
  mode.m = j.at("m").get<double>();
  mode.w = j.at("w").get<double>();
  mode.pi = j.at("pi").get<double>();
  mode.mu = j.at("mu").get<double>();
  mode.sigma = j.at("sigma").get<double>();
  return mode;
}

}  // namespace

absl::StatusOr<TableCodec> StatsArtifact::BuildCodec() const {
  std::vector<MdtCodec> mdt;
  mdt.reserve(gmm.size());
  for (const GmmColumnFit& fit : gmm) {
    absl::StatusOr<MdtCodec> codec =
        MdtCodec::FromPosterior(fit.posterior, mode_policy, lambda, sigma_floor);
    if (!codec.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "column '", fit.column, "': ", codec.status().message()));
    }
    mdt.push_back(*std::move(codec));
  }
  return TableCodec::Create(schema, std::move(mdt), icdm);
}

std::vector<std::pair<double, double>> StatsArtifact::ContinuousRanges()
    const {
  std::vector<std::pair<double, double>> out;
  for (const GmmColumnFit& fit : gmm) out.emplace_back(fit.data_min, fit.data_max);
  return out;
}

std::string StatsArtifact::ToJson() const {
  Json j;
  j["version"] = std::string(kVersion);
  j["schema"] = Json::parse(schema.ToJson());
  j["lambda"] = lambda;
  j["mode_policy"] = std::string(ModePolicyName(mode_policy));
  j["sigma_floor"] = sigma_floor;
  j["seed"] = seed;
  j["client_rows"] = client_rows;

  Json gmm_json = Json::array();
  for (const GmmColumnFit& fit : gmm) {
    Json modes = Json::array();
    for (const GmmMode& mode : fit.posterior.modes) modes.push_back(ModeToJson(mode));
    gmm_json.push_back({{"column", fit.column},
                        {"initial_modes", fit.initial_modes},
                        {"rounds", fit.rounds},
                        {"chosen_init", fit.chosen_init},
                        {"converged", fit.converged},
                        {"final_elbo", fit.final_elbo},
                        {"data_min", fit.data_min},
                        {"data_max", fit.data_max},
                        {"modes", std::move(modes)}});
  }
  j["gmm"] = std::move(gmm_json);

  Json icdm_json = Json::array();
  for (size_t i = 0; i < icdm.size(); ++i) {
    Json entries = Json::array();
    for (const IcdmEntry& e : icdm[i].entries()) {
      entries.push_back({{"category", e.category},
                         {"frequency", e.frequency},
                         {"q_low", e.q_low},
                         {"q_high", e.q_high}});
    }
    icdm_json.push_back(
        {{"column", schema.column(schema.discrete_indices()[i]).name},
         {"entries", std::move(entries)}});
  }
  j["icdm"] = std::move(icdm_json);

  const Eigen::Index l = covariance.sigma.rows();
  Json layout = Json::array();
  if (absl::StatusOr<TableCodec> codec = BuildCodec(); codec.ok()) {
    for (const LayoutSlot& slot : codec->layout()) {
      layout.push_back({{"kind", std::string(SlotKindName(slot.kind))},
                        {"column", schema.column(slot.schema_column).name}});
    }
  }
  j["l"] = l;
  j["layout"] = std::move(layout);
  j["covariance"] = {{"sigma", MatrixToJson(covariance.sigma)},
                     {"mean", MatrixToJson(covariance.mean)},
                     {"clamped", covariance.clamped},
                     {"clamp_count", covariance.clamp_count},
                     {"noise_sigma", covariance.noise_sigma}};
  j["dp"] = {{"epsilon", dp.epsilon.has_value() ? Json(*dp.epsilon) : Json()},
             {"delta", dp.delta},
             {"sensitivity", dp.sensitivity},
             {"seed", dp.seed}};
  j["cholesky"] = {{"u", MatrixToJson(factor.u)},
                   {"repair_shift", factor.repair_shift},
                   {"used_jitter", factor.used_jitter},
                   {"eigen_repaired", factor.eigen_repaired}};
  return j.dump(2) + "\n";
}

absl::StatusOr<StatsArtifact> StatsArtifact::FromJson(std::string_view text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::InvalidArgumentError("statistics artifact is not valid JSON");
  }
  try {
    if (j.at("version").get<std::string>() != kVersion) {
      return absl::InvalidArgumentError(absl::StrCat(
          "unsupported artifact version '", j.at("version").get<std::string>(),
          "'"));
    }
    absl::StatusOr<Schema> schema = Schema::FromJson(j.at("schema").dump());
    if (!schema.ok()) return schema.status();
    StatsArtifact a{.schema = *std::move(schema)};
    a.lambda = j.at("lambda").get<double>();
    std::optional<ModePolicy> policy =
        ParseModePolicy(j.at("mode_policy").get<std::string>());
    if (!policy) return absl::InvalidArgumentError("unknown mode_policy");
    a.mode_policy = *policy;
    a.sigma_floor = j.at("sigma_floor").get<double>();
    a.seed = j.at("seed").get<uint64_t>();
    a.client_rows = j.at("client_rows").get<std::vector<size_t>>();

    for (const Json& g : j.at("gmm")) {
      GmmColumnFit fit;
      fit.column = g.at("column").get<std::string>();
      fit.initial_modes = g.at("initial_modes").get<int>();
      fit.rounds = g.at("rounds").get<int>();
      fit.chosen_init = g.at("chosen_init").get<int>();
      fit.converged = g.at("converged").get<bool>();
      fit.final_elbo = g.at("final_elbo").get<double>();
      fit.data_min = g.at("data_min").get<double>();
      fit.data_max = g.at("data_max").get<double>();
      for (const Json& m : g.at("modes")) {
        fit.posterior.modes.push_back(ModeFromJson(m));
      }
      a.gmm.push_back(std::move(fit));
    }
    if (a.gmm.size() != a.schema.num_continuous()) {
      return absl::InvalidArgumentError(
          "artifact needs one mixture per continuous column");
    }
    for (size_t i = 0; i < a.gmm.size(); ++i) {
      if (a.gmm[i].column !=
          a.schema.column(a.schema.continuous_indices()[i]).name) {
        return absl::InvalidArgumentError("mixture columns out of order");
      }
    }

    const Json& icdm = j.at("icdm");
    if (icdm.size() != a.schema.num_discrete()) {
      return absl::InvalidArgumentError(
          "artifact needs one category codec per discrete column");
    }
    for (size_t i = 0; i < icdm.size(); ++i) {
      const std::string& name =
          a.schema.column(a.schema.discrete_indices()[i]).name;
      if (icdm[i].at("column").get<std::string>() != name) {
        return absl::InvalidArgumentError("category codecs out of order");
      }
      std::vector<IcdmEntry> entries;
      for (const Json& e : icdm[i].at("entries")) {
        entries.push_back({e.at("category").get<std::string>(),
                           e.at("frequency").get<double>(),
                           e.at("q_low").get<double>(),
                           e.at("q_high").get<double>()});
      }
      absl::StatusOr<IcdmCodec> codec =
          IcdmCodec::FromEntries(std::move(entries), a.lambda);
      if (!codec.ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat("column '", name, "': ", codec.status().message()));
      }
      a.icdm.push_back(*std::move(codec));
    }

    const auto l = j.at("l").get<Eigen::Index>();
    if (l != static_cast<Eigen::Index>(2 * a.schema.num_continuous() +
                                       a.schema.num_discrete())) {
      return absl::InvalidArgumentError("layout width does not match schema");
    }
    const Json& cov = j.at("covariance");
    a.covariance.sigma = MatrixFromJson(cov.at("sigma"), l, l);
    a.covariance.mean = MatrixFromJson(cov.at("mean"), l, 1);
    a.covariance.clamped = cov.at("clamped").get<bool>();
    a.covariance.clamp_count = cov.at("clamp_count").get<size_t>();
    a.covariance.noise_sigma = cov.at("noise_sigma").get<double>();

    const Json& dp = j.at("dp");
    if (!dp.at("epsilon").is_null()) a.dp.epsilon = dp.at("epsilon").get<double>();
    a.dp.delta = dp.at("delta").get<double>();
    a.dp.sensitivity = dp.at("sensitivity").get<double>();
    a.dp.seed = dp.at("seed").get<uint64_t>();

    const Json& chol = j.at("cholesky");
    a.factor.u = MatrixFromJson(chol.at("u"), l, l);
    a.factor.repair_shift = chol.at("repair_shift").get<double>();
    a.factor.used_jitter = chol.at("used_jitter").get<bool>();
    a.factor.eigen_repaired = chol.at("eigen_repaired").get<bool>();

    if (absl::StatusOr<TableCodec> codec = a.BuildCodec(); !codec.ok()) {
      return codec.status();
    }
    return a;
  } catch (const std::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed statistics artifact: ", e.what()));
  }
}

}  // namespace fedtab
