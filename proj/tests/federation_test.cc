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

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fedtab/comm_ledger.h"
#include "fedtab/demo_data.h"
#include "fedtab/partition.h"
#include "fedtab/random.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fedtab {
namespace {

Table Demo(size_t rows, uint64_t seed) {
  auto t = MakeDemoTable({.rows = rows, .seed = seed});
  EXPECT_TRUE(t.ok()) << t.status();
  return *std::move(t);
}

FitSettings QuickSettings(uint64_t seed) {
  FitSettings s;
  s.prior = GmmPrior::Default(5);
  s.seed = seed;
  s.dp.seed = MixSeed(seed, 4);
  return s;
}

TEST(RunFederatedFitTest, SingleClientMatchesCentralizedStatistics) {
  Table table = Demo(800, 3);
  const Schema& schema = table.schema();
  FitSettings settings = QuickSettings(11);
  settings.clamp_covariance = false;
  std::vector<ClientContext> clients = {ClientContext(0, table)};
  auto artifact = RunFederatedFit(clients, schema, settings);
  ASSERT_TRUE(artifact.ok()) << artifact.status();

  for (size_t i = 0; i < schema.num_continuous(); ++i) {
    const std::vector<std::span<const double>> one = {
        table.Continuous(schema.continuous_indices()[i])};
    auto fit = FitFederatedGmm(one, settings.prior,
                               {.seed = MixSeed(settings.seed, kGmmSeedTag + i)});
    ASSERT_TRUE(fit.ok());
    EXPECT_EQ(artifact->gmm[i].posterior, fit->posterior);
  }
  for (size_t j = 0; j < schema.num_discrete(); ++j) {
    std::map<std::string, double> counts;
    for (const std::string& t : table.Discrete(schema.discrete_indices()[j])) {
      counts[t] += 1;
    }
    const IcdmCodec& codec = artifact->icdm[j];
    ASSERT_EQ(codec.num_categories(), counts.size());
    for (const IcdmEntry& e : codec.entries()) {
      EXPECT_NEAR(e.frequency, counts[e.category] / 800.0, 1e-12);
    }
  }
  auto codec = artifact->BuildCodec();
  ASSERT_TRUE(codec.ok());
  auto x = codec->Encode(table, MixSeed(settings.seed, kEncodeSeedTag + 0));
  ASSERT_TRUE(x.ok());
  const Eigen::RowVectorXd mean = x->colwise().mean();
  const Eigen::MatrixXd centered = x->rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / 800.0;
  EXPECT_LT((artifact->covariance.sigma - cov).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((artifact->covariance.mean - mean.transpose()).cwiseAbs().maxCoeff(),
            1e-12);
  EXPECT_EQ(artifact->covariance.noise_sigma, 0.0);
}

TEST(RunFederatedFitTest, LedgerMatchesClosedFormsWithEmptyClient) {
  Table table = Demo(600, 4);
  const Schema& schema = table.schema();
  auto shards = DirichletPartition(table, {.beta = 0.1, .num_clients = 4,
                                           .seed = 2});
  ASSERT_TRUE(shards.ok());
  std::vector<ClientContext> clients;
  for (int k = 0; k < 4; ++k) clients.emplace_back(k, (*shards)[k]);
  clients.emplace_back(4, Table::Empty(schema));
  CommLedger ledger;
  auto artifact = RunFederatedFit(clients, schema, QuickSettings(5), &ledger);
  ASSERT_TRUE(artifact.ok()) << artifact.status();
  const uint64_t k = 5;
  const uint64_t l = 2 * schema.num_continuous() + schema.num_discrete();
  uint64_t categories = 0;
  for (const IcdmCodec& c : artifact->icdm) categories += c.num_categories();
  const LedgerSummary s = ledger.Summarize();
  EXPECT_EQ(s.Get(Phase::kMoments, Direction::kUpload).scalars, k * l * (l + 1));
  EXPECT_EQ(s.Get(Phase::kCovarianceBroadcast, Direction::kDownload).scalars,
            k * l * l);
  // K * n_d * p with p the mean category count.
  EXPECT_EQ(s.Get(Phase::kFrequency, Direction::kUpload).scalars, k * categories);
  EXPECT_EQ(s.Get(Phase::kFrequency, Direction::kDownload).scalars,
            k * categories);
  uint64_t gmm_up = 0;
  for (const GmmColumnFit& f : artifact->gmm) {
    gmm_up += k * (3 * f.initial_modes + 2) * f.rounds;
  }
  EXPECT_EQ(s.Get(Phase::kGmmRound, Direction::kUpload).scalars, gmm_up);
  EXPECT_EQ(artifact->client_rows.back(), 0u);
}

TEST(RunFederatedFitTest, DpNoiseTakesRepairPath) {
  Table table = Demo(500, 6);
  FitSettings settings = QuickSettings(8);
  settings.dp.epsilon = 1.0;
  std::vector<ClientContext> clients = {ClientContext(0, table)};
  auto artifact = RunFederatedFit(clients, table.schema(), settings);
  ASSERT_TRUE(artifact.ok()) << artifact.status();
  EXPECT_NEAR(artifact->covariance.noise_sigma, 8.6872, 1e-3);
  EXPECT_TRUE(artifact->factor.eigen_repaired);
  EXPECT_GT(artifact->factor.repair_shift, 0.0);
}

TEST(RunFederatedFitTest, ErrorsNameThePhase) {
  Table table = Demo(100, 1);
  EXPECT_FALSE(RunFederatedFit({}, table.schema(), QuickSettings(1)).ok());
  FitSettings bad = QuickSettings(1);
  bad.prior.nu0 = -1;
  std::vector<ClientContext> clients = {ClientContext(0, table)};
  auto r = RunFederatedFit(clients, table.schema(), bad);
  ASSERT_FALSE(r.ok());
  EXPECT_NE(std::string(r.status().message()).find("gmm"), std::string::npos);
}

}  // namespace
}  // namespace fedtab
