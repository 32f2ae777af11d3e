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

#include "fedtab/fed_train.h"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fedtab/random.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fedtab {
namespace {

using namespace ::fedtab::testing;  // NOLINT

Dataset RandomDataset(int n, int d, int classes, Rng& rng) {
  Dataset data;
  data.x.resize(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.x(i, j) = rng.Normal();
    data.labels.push_back(static_cast<int>(rng.UniformInt(classes)));
  }
  return data;
}

// Two Gaussian blobs 6 standard deviations apart along the first axis.
Dataset SeparableDataset(int n, uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.x.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    const int c = i % 2;
    data.x(i, 0) = (c == 0 ? -3.0 : 3.0) + rng.Normal();
    data.x(i, 1) = rng.Normal();
    data.labels.push_back(c);
  }
  return data;
}

TEST(FeaturizerTest, OneHotWidthAndUnseenCategories) {
  Schema schema = MakeSchema({Cont("age"), Disc("sex"), Label()});
  auto f = Featurizer::Create(schema, {{10.0, 2.0}},
                              {{"F", "M"}, {"no", "yes"}});
  ASSERT_TRUE(f.ok()) << f.status();
  EXPECT_EQ(f->feature_dim(), 3u);
  EXPECT_EQ(f->num_classes(), 2u);

  Table t = MakeTable(schema, {Numbers({12, 8}), Tokens({"M", "X"}),
                               Tokens({"yes", "no"})});
  auto d = f->Featurize(t);
  ASSERT_TRUE(d.ok());
  EXPECT_EQ(d->x.row(0), Eigen::RowVector3d(1.0, 0.0, 1.0));
  EXPECT_EQ(d->x.row(1), Eigen::RowVector3d(-1.0, 0.0, 0.0));
  EXPECT_EQ(d->labels, (std::vector<int>{1, 0}));
  EXPECT_EQ(d->unseen_categories, 1u);

  // Same row, same vector, wherever it is featurized.
  auto again = f->Featurize(t.Select(std::vector<size_t>{0}));
  EXPECT_EQ(again->x.row(0), d->x.row(0));

  auto empty = f->Featurize(Table::Empty(schema));
  ASSERT_TRUE(empty.ok());
  EXPECT_EQ(empty->x.rows(), 0);
  EXPECT_EQ(empty->x.cols(), 3);

  Table bad_label = MakeTable(schema, {Numbers({1}), Tokens({"F"}),
                                       Tokens({"maybe"})});
  EXPECT_FALSE(f->Featurize(bad_label).ok());
}

TEST(SoftmaxTest, GradientMatchesFiniteDifferences) {
  Rng rng(2026);
  for (int instance = 0; instance < 20; ++instance) {
    const int d = 1 + static_cast<int>(rng.UniformInt(4));
    const int c = 2 + static_cast<int>(rng.UniformInt(3));
    const int n = 3 + static_cast<int>(rng.UniformInt(10));
    Dataset data = RandomDataset(n, d, c, rng);
    SoftmaxModel model = SoftmaxModel::Zeros(d, c);
    for (int i = 0; i < model.weights.size(); ++i) {
      model.weights.data()[i] = rng.Normal();
    }
    const Eigen::MatrixXd grad = SoftmaxGradient(model, data.x, data.labels);
    ASSERT_EQ(grad.rows(), d + 1);
    ASSERT_EQ(grad.cols(), c);
    const double h = 1e-5;
    for (int i = 0; i < model.weights.size(); ++i) {
      SoftmaxModel plus = model, minus = model;
      plus.weights.data()[i] += h;
      minus.weights.data()[i] -= h;
      const double fd = (SoftmaxLoss(plus, data.x, data.labels) -
                         SoftmaxLoss(minus, data.x, data.labels)) /
                        (2 * h);
      const double g = grad.data()[i];
      const double scale = std::max({std::abs(g), std::abs(fd), 1e-6});
      EXPECT_LT(std::abs(g - fd) / scale, 1e-5)
          << "instance " << instance << " entry " << i;
    }
  }
}

TEST(SoftmaxTest, ProbabilitiesAreNormalized) {
  SoftmaxModel model = SoftmaxModel::Zeros(2, 3);
  model.weights(0, 1) = 500.0;  // large logits stay finite
  Eigen::MatrixXd x(2, 2);
  x << 1, 0, -1, 0;
  const Eigen::MatrixXd p = model.Probabilities(x);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-15);
  EXPECT_TRUE(p.allFinite());
}

TEST(LocalUpdateTest, ZeroEpochsLeavesModelUnchanged) {
  Dataset data = SeparableDataset(40, 1);
  SoftmaxModel model = SoftmaxModel::Zeros(2, 2);
  model.weights(0, 0) = 0.3;
  TrainConfig cfg;
  cfg.local_epochs = 0;
  EXPECT_EQ(LocalUpdate(model, data, cfg, 1).weights, model.weights);
}

TEST(LocalUpdateTest, SeparableDataIsLearned) {
  Dataset data = SeparableDataset(400, 2);
  TrainConfig cfg{.rounds = 1, .local_epochs = 50, .learning_rate = 0.1,
                  .batch_size = 32};
  SoftmaxModel model = LocalUpdate(SoftmaxModel::Zeros(2, 2), data, cfg, 5);
  EXPECT_GT(Evaluate(model, data).accuracy, 0.95);
  EXPECT_EQ(LocalUpdate(SoftmaxModel::Zeros(2, 2), data, cfg, 5).weights,
            model.weights);
}

TEST(FedavgTest, WeightedAverage) {
  Rng rng(3);
  SoftmaxModel a = SoftmaxModel::Zeros(3, 2), b = SoftmaxModel::Zeros(3, 2);
  for (int i = 0; i < a.weights.size(); ++i) {
    a.weights.data()[i] = rng.Normal();
    b.weights.data()[i] = rng.Normal();
  }
  std::vector<SoftmaxModel> ab = {a, b};
  const std::vector<size_t> counts = {1, 3};
  auto avg = FedavgAggregate(ab, counts);
  ASSERT_TRUE(avg.ok());
  const Eigen::MatrixXd want = 0.25 * a.weights + 0.75 * b.weights;
  EXPECT_LT((avg->weights - want).cwiseAbs().maxCoeff(), 1e-15);

  std::vector<SoftmaxModel> same = {a, a, a};
  const std::vector<size_t> c3 = {5, 1, 2};
  EXPECT_LT((FedavgAggregate(same, c3)->weights - a.weights).cwiseAbs().maxCoeff(),
            1e-15);

  SoftmaxModel neg = a;
  neg.weights = -a.weights;
  std::vector<SoftmaxModel> opposite = {a, neg};
  const std::vector<size_t> equal = {4, 4};
  EXPECT_TRUE(FedavgAggregate(opposite, equal)->weights.isZero());

  std::vector<SoftmaxModel> mismatched = {a, SoftmaxModel::Zeros(2, 2)};
  EXPECT_FALSE(FedavgAggregate(mismatched, equal).ok());
  EXPECT_FALSE(FedavgAggregate(ab, std::vector<size_t>{1}).ok());
}

TEST(RocAucTest, Examples) {
  const std::vector<int> labels = {0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(RocAuc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, labels),
                   0.75);
  EXPECT_DOUBLE_EQ(RocAuc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, labels),
                   1.0);
  EXPECT_DOUBLE_EQ(RocAuc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, labels),
                   0.5);
  EXPECT_TRUE(std::isnan(
      RocAuc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1})));
}

TEST(TrainFederatedTest, ZeroRoundsReportsInitialModel) {
  Dataset data = SeparableDataset(100, 4);
  std::vector<Dataset> shards = {data};
  TrainConfig cfg;
  cfg.rounds = 0;
  auto r = TrainFederated(shards, data, cfg);
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r->curve.size(), 1u);
  EXPECT_EQ(r->curve[0].round, 0);
  EXPECT_TRUE(r->model.weights.isZero());
  const EvalMetrics init = Evaluate(SoftmaxModel::Zeros(2, 2), data);
  EXPECT_EQ(r->curve[0].metrics.accuracy, init.accuracy);
  EXPECT_DOUBLE_EQ(*r->curve[0].metrics.rocauc, 0.5);
}

TEST(TrainFederatedTest, SingleClientEqualsCentralizedTraining) {
  Dataset data = SeparableDataset(120, 6);
  TrainConfig cfg{.rounds = 4, .local_epochs = 2, .learning_rate = 0.05,
                  .batch_size = 16, .seed = 77};
  std::vector<Dataset> shards = {data};
  auto r = TrainFederated(shards, data, cfg);
  ASSERT_TRUE(r.ok());
  SoftmaxModel model = SoftmaxModel::Zeros(2, 2);
  for (int round = 1; round <= cfg.rounds; ++round) {
    model = LocalUpdate(model, data, cfg, MixSeed(MixSeed(cfg.seed, round), 0));
  }
  EXPECT_LT((r->model.weights - model.weights).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(r->curve.size(), 5u);
}

struct CountingHook : ModelExchangeHook {
  size_t calls = 0, scalars = 0;
  void OnRound(int, size_t, size_t s) override {
    ++calls;
    scalars += s;
  }
};

TEST(TrainFederatedTest, DeterministicWithEmptyShardAndHook) {
  Rng rng(8);
  std::vector<Dataset> shards = {RandomDataset(50, 3, 3, rng),
                                 RandomDataset(0, 3, 3, rng),
                                 RandomDataset(70, 3, 3, rng)};
  Dataset test = RandomDataset(30, 3, 3, rng);
  TrainConfig cfg{.rounds = 3, .local_epochs = 1, .learning_rate = 0.1,
                  .batch_size = 8, .seed = 1};
  CountingHook hook;
  auto a = TrainFederated(shards, test, cfg, &hook);
  auto b = TrainFederated(shards, test, cfg);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(a->model.weights, b->model.weights);
  EXPECT_EQ(hook.calls, 3u * 3u);
  EXPECT_EQ(hook.scalars, 3u * 3u * 4u * 3u);
  EXPECT_FALSE(a->curve.back().metrics.rocauc.has_value());
}

TEST(CurvesTest, CsvLayout) {
  std::vector<RoundMetrics> raw = {{0, {0.5, 0.6}}, {1, {0.75, 0.7}}};
  std::vector<RoundMetrics> aug = {{0, {0.5, 0.6}}, {1, {0.8, 0.9}}};
  const std::string csv = CurvesToCsv(raw, aug);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "round,raw_accuracy,augmented_accuracy,raw_rocauc,augmented_rocauc");
  std::vector<RoundMetrics> no_auc = {{0, {0.5, std::nullopt}}};
  const std::string csv2 = CurvesToCsv(no_auc, no_auc);
  EXPECT_EQ(csv2.substr(0, csv2.find('\n')),
            "round,raw_accuracy,augmented_accuracy");
}

}  // namespace
}  // namespace fedtab
