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

#include "fedtab/federation.h"

#include <algorithm>
#include <future>
#include <set>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fedtab/random.h"

namespace fedtab {
namespace {

uint64_t TokenBytes(std::span<const std::string> tokens) {
  uint64_t bytes = 0;
  for (const std::string& t : tokens) bytes += t.size();
  return bytes;
}

absl::Status WithPhase(std::string_view phase, const absl::Status& status) {
  return absl::Status(status.code(),
                      absl::StrCat(std::string(phase), ": ", status.message()));
}

}  // namespace

GmmClientSession ClientContext::OpenGmmSession(size_t continuous_index) const {
  return GmmClientSession(
      table_.Continuous(table_.schema().continuous_indices()[continuous_index]));
}

std::vector<std::string> ClientContext::LocalVocabulary(
    size_t discrete_index) const {
  std::span<const std::string> tokens =
      table_.Discrete(table_.schema().discrete_indices()[discrete_index]);
  std::set<std::string> distinct(tokens.begin(), tokens.end());
  return {distinct.begin(), distinct.end()};
}

CategoryCounts ClientContext::CountCategories(
    size_t discrete_index, std::span<const std::string> vocabulary) const {
  CategoryCounts out;
  out.counts.assign(vocabulary.size(), 0.0);
  for (const std::string& token :
       table_.Discrete(table_.schema().discrete_indices()[discrete_index])) {
    auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), token);
    if (it != vocabulary.end() && *it == token) {
      out.counts[static_cast<size_t>(it - vocabulary.begin())] += 1.0;
    }
  }
  return out;
}

absl::StatusOr<LocalMoments> ClientContext::ComputeMoments(
    const TableCodec& codec, uint64_t seed) const {
  if (table_.num_rows() == 0) {
    LocalMoments empty;
    empty.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(codec.width()));
    empty.second_moment = Eigen::MatrixXd::Zero(empty.mean.size(), empty.mean.size());
    return empty;
  }
  absl::StatusOr<Eigen::MatrixXd> encoded = codec.Encode(table_, seed);
  if (!encoded.ok()) return encoded.status();
  return ComputeLocalMoments(*encoded);
}

absl::StatusOr<GmmColumnFit> ServerContext::FitColumn(
    size_t continuous_index, std::span<GmmClientSession* const> sessions) {
  GmmFitOptions options;
  options.seed = MixSeed(settings_.seed, kGmmSeedTag + continuous_index);
  options.ledger = ledger_;
  absl::StatusOr<GmmFit> fit =
      FitFederatedGmm(sessions, settings_.prior, options);
  if (!fit.ok()) return fit.status();
  GmmColumnFit out;
  out.column = schema_.column(schema_.continuous_indices()[continuous_index]).name;
  out.posterior = std::move(fit->posterior);
  out.initial_modes = settings_.prior.max_modes;
  out.rounds = fit->rounds;
  out.chosen_init = fit->chosen_init;
  out.converged = fit->converged;
  out.final_elbo = fit->final_elbo;
  out.data_min = fit->data_min;
  out.data_max = fit->data_max;
  return out;
}

std::vector<std::string> ServerContext::MergeVocabularies(
    std::span<const std::vector<std::string>> local) {
  std::set<std::string> merged;
  for (const auto& tokens : local) merged.insert(tokens.begin(), tokens.end());
  return {merged.begin(), merged.end()};
}

absl::StatusOr<IcdmCodec> ServerContext::BuildCategoryCodec(
    std::span<const std::string> vocabulary,
    std::span<const CategoryCounts> counts) {
  std::vector<double> totals(vocabulary.size(), 0.0);
  double rows = 0.0;
  for (const CategoryCounts& c : counts) {
    if (c.counts.size() != vocabulary.size()) {
      return absl::FailedPreconditionError(
          "category counts do not match the vocabulary");
    }
    for (size_t i = 0; i < totals.size(); ++i) {
      totals[i] += c.counts[i];
      rows += c.counts[i];
    }
  }
  std::vector<std::pair<std::string, double>> frequencies;
  for (size_t i = 0; i < vocabulary.size(); ++i) {
    if (totals[i] > 0.0) frequencies.emplace_back(vocabulary[i], totals[i] / rows);
  }
  return IcdmCodec::Build(std::move(frequencies), settings_.lambda);
}

absl::StatusOr<std::pair<GlobalCovariance, CholFactor>>
ServerContext::MergeMoments(std::span<const LocalMoments> moments) {
  std::vector<LocalMoments> nonempty;
  for (const LocalMoments& m : moments) {
    if (m.count > 0) nonempty.push_back(m);
  }
  absl::StatusOr<GlobalCovariance> cov =
      AggregateCovariance(nonempty, {.clamp = settings_.clamp_covariance});
  if (!cov.ok()) return cov.status();
  const double epsilon = settings_.dp.epsilon.value_or(
      std::numeric_limits<double>::infinity());
  absl::StatusOr<double> sigma =
      GaussianSigma(epsilon, settings_.dp.delta, settings_.dp.sensitivity);
  if (!sigma.ok()) return sigma.status();
  AddDpNoise(*cov, *sigma, settings_.dp.seed);
  absl::StatusOr<CholFactor> factor = PsdCholesky(cov->sigma);
  if (!factor.ok()) return factor.status();
  return std::make_pair(*std::move(cov), *std::move(factor));
}

absl::StatusOr<StatsArtifact> RunFederatedFit(
    std::span<const ClientContext> clients, const Schema& schema,
    const FitSettings& settings, CommLedger* ledger) {
  if (clients.empty()) {
    return absl::InvalidArgumentError("fit needs at least one client");
  }
  ServerContext server(schema, settings, ledger);
  StatsArtifact artifact{.schema = schema};
  artifact.lambda = settings.lambda;
  artifact.mode_policy = settings.mode_policy;
  artifact.sigma_floor = settings.prior.sigma_floor;
  artifact.dp = settings.dp;
  artifact.seed = settings.seed;
  for (const ClientContext& c : clients) artifact.client_rows.push_back(c.num_rows());

  // Phase 1: one federated mixture per continuous column. Columns are
  // independent, so they run concurrently, each into its own ledger; the
  // ledgers are merged in column order to keep the record deterministic.
  const size_t num_continuous = schema.num_continuous();
  std::vector<CommLedger> column_ledgers(num_continuous);
  std::vector<std::future<absl::StatusOr<GmmColumnFit>>> fits;
  for (size_t i = 0; i < num_continuous; ++i) {
    CommLedger* column_ledger = ledger != nullptr ? &column_ledgers[i] : nullptr;
    fits.push_back(std::async(std::launch::async, [&, i, column_ledger] {
      std::vector<GmmClientSession> sessions;
      sessions.reserve(clients.size());
      for (const ClientContext& c : clients) {
        sessions.push_back(c.OpenGmmSession(i));
      }
      std::vector<GmmClientSession*> handles;
      for (GmmClientSession& s : sessions) handles.push_back(&s);
      ServerContext column_server(schema, settings, column_ledger);
      return column_server.FitColumn(i, handles);
    }));
  }
  for (size_t i = 0; i < num_continuous; ++i) {
    absl::StatusOr<GmmColumnFit> fit = fits[i].get();
    if (!fit.ok()) {
      return WithPhase(absl::StrCat("gmm column '",
                                    schema.column(schema.continuous_indices()[i]).name,
                                    "'"),
                       fit.status());
    }
    artifact.gmm.push_back(*std::move(fit));
    if (ledger != nullptr) {
      for (const LedgerEntry& e : column_ledgers[i].Snapshot()) {
        ledger->Record(e.phase, e.direction, e.client, e.scalar_count,
                       e.token_bytes);
      }
    }
  }

  // Phase 2: global vocabularies, then dense frequency counts against them.
  for (size_t j = 0; j < schema.num_discrete(); ++j) {
    std::vector<std::vector<std::string>> local;
    for (const ClientContext& c : clients) {
      local.push_back(c.LocalVocabulary(j));
      if (ledger) {
        ledger->Record(Phase::kVocabulary, Direction::kUpload, c.id(), 0,
                       TokenBytes(local.back()));
      }
    }
    const std::vector<std::string> vocabulary = server.MergeVocabularies(local);
    std::vector<CategoryCounts> counts;
    for (const ClientContext& c : clients) {
      if (ledger) {
        ledger->Record(Phase::kVocabulary, Direction::kDownload, c.id(), 0,
                       TokenBytes(vocabulary));
        ledger->Record(Phase::kFrequency, Direction::kUpload, c.id(),
                       vocabulary.size());
      }
      counts.push_back(c.CountCategories(j, vocabulary));
    }
    absl::StatusOr<IcdmCodec> codec = server.BuildCategoryCodec(vocabulary, counts);
    if (!codec.ok()) {
      return WithPhase(
          absl::StrCat("frequency column '",
                       schema.column(schema.discrete_indices()[j]).name, "'"),
          codec.status());
    }
    if (ledger) {
      for (const ClientContext& c : clients) {
        ledger->Record(Phase::kFrequency, Direction::kDownload, c.id(),
                       vocabulary.size());
      }
    }
    artifact.icdm.push_back(*std::move(codec));
  }

  // Phase 3: clients encode locally and upload moments.
  absl::StatusOr<TableCodec> codec = artifact.BuildCodec();
  if (!codec.ok()) return WithPhase("codec", codec.status());
  std::vector<std::future<absl::StatusOr<LocalMoments>>> jobs;
  for (const ClientContext& c : clients) {
    const uint64_t seed =
        MixSeed(settings.seed, kEncodeSeedTag + static_cast<uint64_t>(c.id()));
    jobs.push_back(std::async(std::launch::async, [&c, &codec, seed] {
      return c.ComputeMoments(*codec, seed);
    }));
  }
  std::vector<LocalMoments> moments;
  for (size_t k = 0; k < clients.size(); ++k) {
    absl::StatusOr<LocalMoments> m = jobs[k].get();
    if (!m.ok()) {
      return WithPhase(absl::StrCat("moments client ", clients[k].id()), m.status());
    }
    if (ledger) {
      ledger->Record(Phase::kMoments, Direction::kUpload, clients[k].id(),
                     m->ScalarCount());
    }
    moments.push_back(*std::move(m));
  }

  // Phase 4: global covariance, noise, factorization, broadcast.
  absl::StatusOr<std::pair<GlobalCovariance, CholFactor>> merged =
      server.MergeMoments(moments);
  if (!merged.ok()) return WithPhase("covariance", merged.status());
  artifact.covariance = std::move(merged->first);
  artifact.factor = std::move(merged->second);
  if (ledger) {
    const uint64_t l = codec->width();
    for (const ClientContext& c : clients) {
      ledger->Record(Phase::kCovarianceBroadcast, Direction::kDownload, c.id(),
                     l * l);
    }
  }
  return artifact;
}

}  // namespace fedtab
