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

#include "fedtab/pipeline.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "fedtab/csv_io.h"
#include "fedtab/partition.h"
#include "fedtab/random.h"
#include "fedtab/synthesis.h"
#include "json.hpp"

namespace fedtab {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

absl::StatusOr<std::string> ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::Status WriteFile(const fs::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) {
    return absl::InternalError(absl::StrCat("cannot write ", path.string()));
  }
  return absl::OkStatus();
}

absl::Status Tagged(std::string_view stage, const absl::Status& status) {
  if (status.ok()) return status;
  return absl::Status(status.code(),
                      absl::StrCat(std::string(stage), ": ", status.message()));
}

fs::path ClientPath(const PipelineConfig& c, int k) {
  return c.output_dir / absl::StrCat("client_", k, ".csv");
}
fs::path SynthPath(const PipelineConfig& c, int k) {
  return c.output_dir / absl::StrCat("client_", k, "_synth.csv");
}

absl::Status CheckKeys(const Json& object, std::string_view where,
                       std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat("config: '", std::string(where), "' must be an object"));
  }
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "config: unknown key '", key, "' in ", std::string(where)));
    }
  }
  return absl::OkStatus();
}

template <typename T>
void Maybe(const Json& object, const char* key, T& out) {
  if (object.contains(key) && !object.at(key).is_null()) {
    out = object.at(key).get<T>();
  }
}

absl::StatusOr<Schema> LoadSchema(const PipelineConfig& config) {
  absl::StatusOr<std::string> text = ReadFile(config.schema_path);
  if (!text.ok()) return text.status();
  return Schema::FromJson(*text);
}

absl::StatusOr<Table> LoadCsv(const fs::path& path, const Schema& schema) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  absl::StatusOr<Table> table = LoadTable(*text, schema);
  if (!table.ok()) {
    return absl::Status(table.status().code(),
                        absl::StrCat(path.filename().string(), ": ",
                                     table.status().message()));
  }
  return table;
}

absl::StatusOr<std::vector<Table>> LoadShards(const PipelineConfig& config,
                                              const Schema& schema,
                                              bool synthetic) {
  std::vector<Table> shards;
  for (int k = 0; k < config.num_clients; ++k) {
    absl::StatusOr<Table> t = LoadCsv(
        synthetic ? SynthPath(config, k) : ClientPath(config, k), schema);
    if (!t.ok()) return t.status();
    shards.push_back(*std::move(t));
  }
  return shards;
}

absl::StatusOr<StatsArtifact> LoadArtifact(const PipelineConfig& config) {
  absl::StatusOr<std::string> text = ReadFile(config.output_dir / "stats.json");
  if (!text.ok()) return text.status();
  return StatsArtifact::FromJson(*text);
}

// Merges `section` into manifest.json under `key`.
absl::Status UpdateManifest(const PipelineConfig& config, const char* key,
                            Json section) {
  const fs::path path = config.output_dir / "manifest.json";
  Json manifest = Json::object();
  if (fs::exists(path)) {
    absl::StatusOr<std::string> text = ReadFile(path);
    if (!text.ok()) return text.status();
    manifest = Json::parse(*text, nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object()) manifest = Json::object();
  }
  manifest["tool"] = "fedtab";
  manifest["version"] = std::string(kToolVersion);
  manifest["stats_version"] = std::string(StatsArtifact::kVersion);
  manifest["config"] = Json::parse(config.ToJson());
  const StageSeeds seeds = StageSeeds::Derive(config.seed);
  manifest["seeds"] = {{"run", config.seed},
                       {"split", seeds.split},
                       {"partition", seeds.partition},
                       {"fit", seeds.fit},
                       {"dp", seeds.dp},
                       {"synthesis", seeds.synthesis},
                       {"train", seeds.train},
                       {"similarity", seeds.similarity}};
  manifest[key] = std::move(section);
  return WriteFile(path, manifest.dump(2) + "\n");
}

Json LedgerJson(const CommLedger& ledger, const StatsArtifact& artifact) {
  const LedgerSummary summary = ledger.Summarize();
  Json phases = Json::array();
  for (const auto& [key, totals] : summary.by_phase) {
    phases.push_back({{"phase", std::string(PhaseName(key.first))},
                      {"direction", std::string(DirectionName(key.second))},
                      {"messages", totals.messages},
                      {"scalars", totals.scalars},
                      {"token_bytes", totals.token_bytes},
                      {"payload_bytes", totals.payload_bytes},
                      {"header_bytes", totals.header_bytes}});
  }
  Json closed = Json::array();
  for (const CostComparison& c : CompareWithClosedForm(summary, artifact)) {
    closed.push_back({{"phase", std::string(PhaseName(c.phase))},
                      {"direction", std::string(DirectionName(c.direction))},
                      {"measured_scalars", c.measured},
                      {"closed_form_scalars", c.closed_form}});
  }
  auto totals = [](const LedgerTotals& t) {
    return Json{{"messages", t.messages},
                {"scalars", t.scalars},
                {"payload_bytes", t.payload_bytes},
                {"header_bytes", t.header_bytes}};
  };
  return {{"phases", std::move(phases)},
          {"closed_form", std::move(closed)},
          {"upload", totals(summary.upload)},
          {"download", totals(summary.download)}};
}

Json MetricsJson(const EvalMetrics& m) {
  Json j = {{"accuracy", m.accuracy}};
  if (m.rocauc) j["rocauc"] = *m.rocauc;
  return j;
}

}  // namespace

StageSeeds StageSeeds::Derive(uint64_t seed) {
  return {MixSeed(seed, 1), MixSeed(seed, 2), MixSeed(seed, 3),
          MixSeed(seed, 4), MixSeed(seed, 5), MixSeed(seed, 6),
          MixSeed(seed, 7)};
}

absl::StatusOr<PipelineConfig> PipelineConfig::FromJson(
    std::string_view json, const fs::path& base_dir) {
  Json j = Json::parse(json, nullptr, false);
  if (j.is_discarded()) {
    return absl::InvalidArgumentError("config: not valid JSON");
  }
  PipelineConfig c;
  try {
    if (absl::Status s = CheckKeys(
            j, "config",
            {"data", "schema", "output_dir", "seed", "test_fraction",
             "partition", "gmm", "icdm", "mdt", "dp", "synthesis", "train"});
        !s.ok()) {
      return s;
    }
    for (const char* key : {"data", "schema", "output_dir"}) {
      if (!j.contains(key) || !j.at(key).is_string()) {
        return absl::InvalidArgumentError(
            absl::StrCat("config: missing string field '", key, "'"));
      }
    }
    auto resolve = [&](const char* key) {
      fs::path p = j.at(key).get<std::string>();
      return p.is_absolute() ? p : base_dir / p;
    };
    c.data_path = resolve("data");
    c.schema_path = resolve("schema");
    c.output_dir = resolve("output_dir");
    Maybe(j, "seed", c.seed);
    Maybe(j, "test_fraction", c.test_fraction);

    const Json empty = Json::object();
    const Json& part = j.value("partition", empty);
    if (absl::Status s = CheckKeys(part, "partition", {"clients", "beta"});
        !s.ok()) {
      return s;
    }
    Maybe(part, "clients", c.num_clients);
    Maybe(part, "beta", c.beta);

    const Json& gmm = j.value("gmm", empty);
    if (absl::Status s = CheckKeys(
            gmm, "gmm",
            {"max_modes", "alpha0", "beta0", "m0", "w0", "nu0", "conv_eps",
             "max_rounds", "num_inits", "prune_threshold", "sigma_floor"});
        !s.ok()) {
      return s;
    }
    int max_modes = 10;
    Maybe(gmm, "max_modes", max_modes);
    c.fit.prior = GmmPrior::Default(max_modes);
    Maybe(gmm, "alpha0", c.fit.prior.alpha0);
    Maybe(gmm, "beta0", c.fit.prior.beta0);
    Maybe(gmm, "m0", c.fit.prior.m0);
    Maybe(gmm, "w0", c.fit.prior.w0);
    Maybe(gmm, "nu0", c.fit.prior.nu0);
    Maybe(gmm, "conv_eps", c.fit.prior.conv_eps);
    Maybe(gmm, "max_rounds", c.fit.prior.max_rounds);
    Maybe(gmm, "num_inits", c.fit.prior.num_inits);
    Maybe(gmm, "prune_threshold", c.fit.prior.prune_threshold);
    Maybe(gmm, "sigma_floor", c.fit.prior.sigma_floor);

    const Json& icdm = j.value("icdm", empty);
    if (absl::Status s = CheckKeys(icdm, "icdm", {"lambda"}); !s.ok()) return s;
    Maybe(icdm, "lambda", c.fit.lambda);

    const Json& mdt = j.value("mdt", empty);
    if (absl::Status s = CheckKeys(mdt, "mdt", {"mode_policy"}); !s.ok()) {
      return s;
    }
    if (mdt.contains("mode_policy")) {
      std::optional<ModePolicy> policy =
          ParseModePolicy(mdt.at("mode_policy").get<std::string>());
      if (!policy) {
        return absl::InvalidArgumentError(
            "config: mdt.mode_policy must be \"sample\" or \"argmax\"");
      }
      c.fit.mode_policy = *policy;
    }

    const Json& dp = j.value("dp", empty);
    if (absl::Status s =
            CheckKeys(dp, "dp", {"epsilon", "delta", "sensitivity", "clamp"});
        !s.ok()) {
      return s;
    }
    if (dp.contains("epsilon") && !dp.at("epsilon").is_null()) {
      c.fit.dp.epsilon = dp.at("epsilon").get<double>();
    }
    Maybe(dp, "delta", c.fit.dp.delta);
    Maybe(dp, "sensitivity", c.fit.dp.sensitivity);
    Maybe(dp, "clamp", c.fit.clamp_covariance);

    const Json& syn = j.value("synthesis", empty);
    if (absl::Status s =
            CheckKeys(syn, "synthesis", {"rows_per_client", "clip"});
        !s.ok()) {
      return s;
    }
    if (syn.contains("rows_per_client") && !syn.at("rows_per_client").is_null()) {
      c.synthetic_rows = syn.at("rows_per_client").get<size_t>();
    }
    Maybe(syn, "clip", c.clip_synthetic);

    const Json& train = j.value("train", empty);
    if (absl::Status s = CheckKeys(
            train, "train",
            {"rounds", "local_epochs", "learning_rate", "batch_size"});
        !s.ok()) {
      return s;
    }
    Maybe(train, "rounds", c.train.rounds);
    Maybe(train, "local_epochs", c.train.local_epochs);
    Maybe(train, "learning_rate", c.train.learning_rate);
    Maybe(train, "batch_size", c.train.batch_size);
  } catch (const std::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("config: ", e.what()));
  }

  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) {
    return absl::InvalidArgumentError("config: test_fraction must be in (0, 1)");
  }
  if (c.num_clients < 1 || !(c.beta > 0.0)) {
    return absl::InvalidArgumentError(
        "config: partition needs clients >= 1 and beta > 0");
  }
  if (absl::Status s = c.fit.prior.Validate(); !s.ok()) {
    return absl::InvalidArgumentError(absl::StrCat("config: gmm: ", s.message()));
  }
  if (!(c.fit.lambda > 0.0 && c.fit.lambda < 0.5)) {
    return absl::InvalidArgumentError("config: icdm.lambda must be in (0, 0.5)");
  }
  if (absl::StatusOr<double> sigma = GaussianSigma(
          c.fit.dp.epsilon.value_or(std::numeric_limits<double>::infinity()),
          c.fit.dp.delta, c.fit.dp.sensitivity);
      !sigma.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat("config: dp: ", sigma.status().message()));
  }
  if (c.synthetic_rows.has_value() && *c.synthetic_rows == 0) {
    return absl::InvalidArgumentError(
        "config: synthesis.rows_per_client must be positive");
  }
  if (c.train.rounds < 0 || c.train.local_epochs < 0 ||
      c.train.batch_size < 1 || !(c.train.learning_rate > 0.0)) {
    return absl::InvalidArgumentError("config: invalid train settings");
  }
  return c;
}

absl::StatusOr<PipelineConfig> PipelineConfig::Load(const fs::path& path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return Tagged("config", text.status());
  absl::StatusOr<PipelineConfig> config =
      FromJson(*text, path.parent_path().empty() ? fs::path(".")
                                                 : path.parent_path());
  if (!config.ok()) return config.status();
  for (const fs::path& p : {config->data_path, config->schema_path}) {
    if (!fs::exists(p)) {
      return absl::NotFoundError(
          absl::StrCat("config: file not found: ", p.string()));
    }
  }
  return config;
}

std::string PipelineConfig::ToJson() const {
  Json j;
  j["data"] = data_path.string();
  j["schema"] = schema_path.string();
  j["output_dir"] = output_dir.string();
  j["seed"] = seed;
  j["test_fraction"] = test_fraction;
  j["partition"] = {{"clients", num_clients}, {"beta", beta}};
  const GmmPrior& p = fit.prior;
  j["gmm"] = {{"max_modes", p.max_modes},       {"alpha0", p.alpha0},
              {"beta0", p.beta0},               {"m0", p.m0},
              {"w0", p.w0},                     {"nu0", p.nu0},
              {"conv_eps", p.conv_eps},         {"max_rounds", p.max_rounds},
              {"num_inits", p.num_inits},
              {"prune_threshold", p.prune_threshold},
              {"sigma_floor", p.sigma_floor}};
  j["icdm"] = {{"lambda", fit.lambda}};
  j["mdt"] = {{"mode_policy", std::string(ModePolicyName(fit.mode_policy))}};
  j["dp"] = {{"epsilon", fit.dp.epsilon ? Json(*fit.dp.epsilon) : Json()},
             {"delta", fit.dp.delta},
             {"sensitivity", fit.dp.sensitivity},
             {"clamp", fit.clamp_covariance}};
  j["synthesis"] = {
      {"rows_per_client", synthetic_rows ? Json(*synthetic_rows) : Json()},
      {"clip", clip_synthetic}};
  j["train"] = {{"rounds", train.rounds},
                {"local_epochs", train.local_epochs},
                {"learning_rate", train.learning_rate},
                {"batch_size", train.batch_size}};
  return j.dump(2) + "\n";
}

absl::StatusOr<std::vector<Table>> SynthesizeClients(
    const StatsArtifact& artifact, std::span<const size_t> rows,
    uint64_t seed, bool clip) {
  absl::StatusOr<TableCodec> codec = artifact.BuildCodec();
  if (!codec.ok()) return codec.status();
  std::vector<Table> out;
  for (size_t k = 0; k < rows.size(); ++k) {
    SynthesisRequest request;
    request.num_rows = rows[k];
    request.seed = MixSeed(seed, k);
    if (clip) request.clip_ranges = artifact.ContinuousRanges();
    absl::StatusOr<Table> table = Synthesize(*codec, artifact.factor.u, request);
    if (!table.ok()) {
      return Tagged(absl::StrCat("client ", k), table.status());
    }
    out.push_back(*std::move(table));
  }
  return out;
}

absl::StatusOr<Featurizer> FeaturizerFromArtifact(
    const StatsArtifact& artifact) {
  std::vector<Featurizer::ContinuousScale> scales;
  for (const GmmColumnFit& fit : artifact.gmm) {
    scales.push_back(
        {fit.posterior.MixtureMean(), fit.posterior.MixtureStddev()});
  }
  std::vector<std::vector<std::string>> categories;
  for (const IcdmCodec& codec : artifact.icdm) {
    std::vector<std::string>& cats = categories.emplace_back();
    for (const IcdmEntry& e : codec.entries()) cats.push_back(e.category);
  }
  return Featurizer::Create(artifact.schema, std::move(scales),
                            std::move(categories));
}

absl::StatusOr<EvaluationResult> EvaluateAugmentation(
    const StatsArtifact& artifact, std::span<const Table> shards,
    std::span<const Table> synthetic, const Table& test,
    const TrainConfig& train, uint64_t similarity_seed, CommLedger* ledger) {
  if (shards.size() != synthetic.size()) {
    return absl::InvalidArgumentError(
        "need one synthetic table per client shard");
  }
  EvaluationResult result;
  absl::StatusOr<Table> real_all = ConcatTables(shards);
  if (!real_all.ok()) return real_all.status();
  absl::StatusOr<Table> synth_all = ConcatTables(synthetic);
  if (!synth_all.ok()) return synth_all.status();
  absl::StatusOr<SimilarityReport> similarity =
      ComputeSimilarity(*real_all, *synth_all, similarity_seed);
  if (!similarity.ok()) return Tagged("similarity", similarity.status());
  result.similarity = *std::move(similarity);

  absl::StatusOr<Featurizer> featurizer = FeaturizerFromArtifact(artifact);
  if (!featurizer.ok()) return featurizer.status();
  absl::StatusOr<Dataset> test_data = featurizer->Featurize(test);
  if (!test_data.ok()) return Tagged("test set", test_data.status());
  std::vector<Dataset> raw, augmented;
  for (size_t k = 0; k < shards.size(); ++k) {
    absl::StatusOr<Dataset> d = featurizer->Featurize(shards[k]);
    if (!d.ok()) return Tagged(absl::StrCat("client ", k), d.status());
    raw.push_back(*std::move(d));
    absl::StatusOr<Table> joined = AugmentClient(shards[k], synthetic[k]);
    if (!joined.ok()) return joined.status();
    absl::StatusOr<Dataset> a = featurizer->Featurize(*joined);
    if (!a.ok()) return Tagged(absl::StrCat("client ", k), a.status());
    augmented.push_back(*std::move(a));
  }

  struct LedgerHook : ModelExchangeHook {
    CommLedger* ledger;
    void OnRound(int, size_t client, size_t scalars) override {
      ledger->Record(Phase::kModelRound, Direction::kDownload,
                     static_cast<int>(client), scalars);
      ledger->Record(Phase::kModelRound, Direction::kUpload,
                     static_cast<int>(client), scalars);
    }
  } hook;
  hook.ledger = ledger;

  absl::StatusOr<TrainResult> raw_run = TrainFederated(raw, *test_data, train);
  if (!raw_run.ok()) return Tagged("train raw", raw_run.status());
  absl::StatusOr<TrainResult> aug_run = TrainFederated(
      augmented, *test_data, train, ledger != nullptr ? &hook : nullptr);
  if (!aug_run.ok()) return Tagged("train augmented", aug_run.status());
  result.raw = *std::move(raw_run);
  result.augmented = *std::move(aug_run);
  return result;
}

std::vector<CostComparison> CompareWithClosedForm(
    const LedgerSummary& summary, const StatsArtifact& artifact) {
  CostModelInputs in;
  in.num_clients = static_cast<int>(artifact.client_rows.size());
  in.num_continuous = static_cast<int>(artifact.schema.num_continuous());
  in.num_discrete = static_cast<int>(artifact.schema.num_discrete());
  double categories = 0.0;
  for (const IcdmCodec& c : artifact.icdm) {
    categories += static_cast<double>(c.num_categories());
  }
  in.avg_categories =
      artifact.icdm.empty() ? 0.0
                            : categories / static_cast<double>(artifact.icdm.size());
  for (const GmmColumnFit& fit : artifact.gmm) {
    in.gmm_columns.emplace_back(fit.initial_modes, fit.rounds);
  }
  const ClosedFormCosts f = EvaluateClosedForm(in);
  auto row = [&](Phase p, Direction d, double closed) {
    return CostComparison{p, d, summary.Get(p, d).scalars, closed};
  };
  return {row(Phase::kGmmRound, Direction::kUpload, f.gmm_upload),
          row(Phase::kGmmRound, Direction::kDownload, f.gmm_download),
          row(Phase::kFrequency, Direction::kUpload, f.frequency_upload),
          row(Phase::kFrequency, Direction::kDownload, f.frequency_download),
          row(Phase::kMoments, Direction::kUpload, f.moments_upload),
          row(Phase::kCovarianceBroadcast, Direction::kDownload,
              f.covariance_download)};
}

absl::Status RunPartitionStage(const PipelineConfig& config) {
  absl::StatusOr<Schema> schema = LoadSchema(config);
  if (!schema.ok()) return Tagged("partition", schema.status());
  absl::StatusOr<Table> data = LoadCsv(config.data_path, *schema);
  if (!data.ok()) return Tagged("partition", data.status());
  const StageSeeds seeds = StageSeeds::Derive(config.seed);
  absl::StatusOr<std::pair<Table, Table>> split =
      TrainTestSplit(*data, config.test_fraction, seeds.split);
  if (!split.ok()) return Tagged("partition", split.status());
  absl::StatusOr<std::vector<Table>> shards = DirichletPartition(
      split->first, {config.beta, config.num_clients, seeds.partition});
  if (!shards.ok()) return Tagged("partition", shards.status());

  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) {
    return absl::InternalError(absl::StrCat(
        "partition: cannot create ", config.output_dir.string()));
  }
  if (absl::Status s =
          WriteFile(config.output_dir / "test.csv", WriteCsv(split->second));
      !s.ok()) {
    return Tagged("partition", s);
  }
  Json rows = Json::array();
  for (int k = 0; k < config.num_clients; ++k) {
    if (absl::Status s = WriteFile(ClientPath(config, k), WriteCsv((*shards)[k]));
        !s.ok()) {
      return Tagged("partition", s);
    }
    rows.push_back((*shards)[k].num_rows());
  }
  return Tagged("partition",
                UpdateManifest(config, "partition",
                               {{"client_rows", std::move(rows)},
                                {"test_rows", split->second.num_rows()}}));
}

absl::Status RunFitStage(const PipelineConfig& config) {
  absl::StatusOr<Schema> schema = LoadSchema(config);
  if (!schema.ok()) return Tagged("fit", schema.status());
  absl::StatusOr<std::vector<Table>> shards = LoadShards(config, *schema, false);
  if (!shards.ok()) return Tagged("fit", shards.status());
  std::vector<ClientContext> clients;
  for (int k = 0; k < config.num_clients; ++k) {
    clients.emplace_back(k, std::move((*shards)[k]));
  }
  const StageSeeds seeds = StageSeeds::Derive(config.seed);
  FitSettings settings = config.fit;
  settings.seed = seeds.fit;
  settings.dp.seed = seeds.dp;
  CommLedger ledger;
  absl::StatusOr<StatsArtifact> artifact =
      RunFederatedFit(clients, *schema, settings, &ledger);
  if (!artifact.ok()) return Tagged("fit", artifact.status());
  if (absl::Status s =
          WriteFile(config.output_dir / "stats.json", artifact->ToJson());
      !s.ok()) {
    return Tagged("fit", s);
  }
  if (absl::Status s = WriteFile(config.output_dir / "ledger.csv", ledger.ToCsv());
      !s.ok()) {
    return Tagged("fit", s);
  }
  Json columns = Json::array();
  for (const GmmColumnFit& fit : artifact->gmm) {
    columns.push_back({{"column", fit.column},
                       {"rounds", fit.rounds},
                       {"converged", fit.converged},
                       {"modes", fit.posterior.num_modes()}});
  }
  return Tagged(
      "fit",
      UpdateManifest(config, "fit",
                     {{"gmm", std::move(columns)},
                      {"l", artifact->covariance.sigma.rows()},
                      {"clamp_count", artifact->covariance.clamp_count},
                      {"noise_sigma", artifact->covariance.noise_sigma},
                      {"repair_shift", artifact->factor.repair_shift}}));
}

absl::Status RunSynthesizeStage(const PipelineConfig& config) {
  absl::StatusOr<StatsArtifact> artifact = LoadArtifact(config);
  if (!artifact.ok()) return Tagged("synthesize", artifact.status());
  std::vector<size_t> rows = artifact->client_rows;
  if (config.synthetic_rows) {
    std::fill(rows.begin(), rows.end(), *config.synthetic_rows);
  }
  const StageSeeds seeds = StageSeeds::Derive(config.seed);
  absl::StatusOr<std::vector<Table>> tables = SynthesizeClients(
      *artifact, rows, seeds.synthesis, config.clip_synthetic);
  if (!tables.ok()) return Tagged("synthesize", tables.status());
  Json files = Json::array();
  for (size_t k = 0; k < tables->size(); ++k) {
    const fs::path path = SynthPath(config, static_cast<int>(k));
    if (absl::Status s = WriteFile(path, WriteCsv((*tables)[k], true)); !s.ok()) {
      return Tagged("synthesize", s);
    }
    files.push_back({{"client", k},
                     {"file", path.filename().string()},
                     {"rows", rows[k]},
                     {"seed", MixSeed(seeds.synthesis, k)}});
  }
  return Tagged("synthesize",
                UpdateManifest(config, "synthesis",
                               {{"clients", std::move(files)},
                                {"clip", config.clip_synthetic},
                                {"repair_shift", artifact->factor.repair_shift}}));
}

absl::Status RunEvaluateStage(const PipelineConfig& config) {
  absl::StatusOr<StatsArtifact> artifact = LoadArtifact(config);
  if (!artifact.ok()) return Tagged("evaluate", artifact.status());
  const Schema& schema = artifact->schema;
  absl::StatusOr<std::vector<Table>> shards = LoadShards(config, schema, false);
  if (!shards.ok()) return Tagged("evaluate", shards.status());
  absl::StatusOr<std::vector<Table>> synth = LoadShards(config, schema, true);
  if (!synth.ok()) return Tagged("evaluate", synth.status());
  absl::StatusOr<Table> test = LoadCsv(config.output_dir / "test.csv", schema);
  if (!test.ok()) return Tagged("evaluate", test.status());
  absl::StatusOr<std::string> ledger_csv =
      ReadFile(config.output_dir / "ledger.csv");
  if (!ledger_csv.ok()) return Tagged("evaluate", ledger_csv.status());
  absl::StatusOr<CommLedger> ledger = CommLedger::FromCsv(*ledger_csv);
  if (!ledger.ok()) return Tagged("evaluate", ledger.status());
  // A rerun of this stage starts from the statistics-phase entries only.
  CommLedger stats_ledger;
  for (const LedgerEntry& e : ledger->Snapshot()) {
    if (e.phase != Phase::kModelRound) {
      stats_ledger.Record(e.phase, e.direction, e.client, e.scalar_count,
                          e.token_bytes);
    }
  }

  const StageSeeds seeds = StageSeeds::Derive(config.seed);
  TrainConfig train = config.train;
  train.seed = seeds.train;
  absl::StatusOr<EvaluationResult> result =
      EvaluateAugmentation(*artifact, *shards, *synth, *test, train,
                           seeds.similarity, &stats_ledger);
  if (!result.ok()) return Tagged("evaluate", result.status());

  const fs::path& out = config.output_dir;
  for (const auto& [name, contents] :
       {std::pair<const char*, std::string>{"similarity.json",
                                            result->similarity.ToJson()},
        {"similarity.csv", result->similarity.ToCsv()},
        {"curves.csv",
         CurvesToCsv(result->raw.curve, result->augmented.curve)},
        {"ledger.csv", stats_ledger.ToCsv()}}) {
    if (absl::Status s = WriteFile(out / name, contents); !s.ok()) {
      return Tagged("evaluate", s);
    }
  }
  Json similarity = Json::parse(result->similarity.ToJson());
  return Tagged(
      "evaluate",
      UpdateManifest(
          config, "evaluate",
          {{"raw", MetricsJson(result->raw.curve.back().metrics)},
           {"augmented", MetricsJson(result->augmented.curve.back().metrics)},
           {"avg_jsd", similarity["avg_jsd"]},
           {"avg_wd", similarity["avg_wd"]},
           {"ledger", LedgerJson(stats_ledger, *artifact)}}));
}

absl::Status RunPipeline(const PipelineConfig& config) {
  for (auto stage : {RunPartitionStage, RunFitStage, RunSynthesizeStage,
                     RunEvaluateStage}) {
    if (absl::Status s = stage(config); !s.ok()) return s;
  }
  return absl::OkStatus();
}

}  // namespace fedtab
