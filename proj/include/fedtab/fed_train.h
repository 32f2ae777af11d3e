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

#ifndef FEDTAB_FED_TRAIN_H_
#define FEDTAB_FED_TRAIN_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "absl/status/statusor.h"
#include "fedtab/table.h"

namespace fedtab {

struct Dataset {
  Eigen::MatrixXd x;        // N x d
  std::vector<int> labels;  // class indices in [0, C)
  size_t unseen_categories = 0;

  size_t size() const { return labels.size(); }
};

// Maps tables onto a fixed feature space built from global statistics:
// continuous columns are standardized with a global mean and standard
// deviation, discrete non-label columns are one-hot encoded over global
// category lists, and the label is indexed over the global class list.
class Featurizer {
 public:
  struct ContinuousScale {
    double mean = 0.0;
    double stddev = 1.0;
  };

  // `scales` follow schema.continuous_indices(); `categories` follow
  // schema.discrete_indices() and include the label column's classes at its
  // position.
  static absl::StatusOr<Featurizer> Create(
      Schema schema, std::vector<ContinuousScale> scales,
      std::vector<std::vector<std::string>> categories);

  size_t feature_dim() const { return feature_dim_; }
  size_t num_classes() const { return classes_.size(); }
  const std::vector<std::string>& classes() const { return classes_; }

  // Unseen feature categories encode as an all-zero block and are counted
  // in Dataset::unseen_categories; an unseen label is an error.
  absl::StatusOr<Dataset> Featurize(const Table& table) const;

 private:
  explicit Featurizer(Schema schema) : schema_(std::move(schema)) {}

  Schema schema_;
  std::vector<ContinuousScale> scales_;
  // Per discrete non-label column: schema index, feature offset, and
  // category list (sorted).
  struct OneHot {
    size_t column = 0;
    size_t offset = 0;
    std::vector<std::string> categories;
  };
  std::vector<OneHot> one_hot_;
  std::vector<std::string> classes_;
  size_t feature_dim_ = 0;
};

// Multinomial logistic regression. Weights are (d + 1) x C; the last row is
// the bias.
struct SoftmaxModel {
  Eigen::MatrixXd weights;

  static SoftmaxModel Zeros(size_t feature_dim, size_t num_classes);
  size_t feature_dim() const { return static_cast<size_t>(weights.rows()) - 1; }
  size_t num_classes() const { return static_cast<size_t>(weights.cols()); }
  // Row-wise class probabilities.
  Eigen::MatrixXd Probabilities(const Eigen::MatrixXd& x) const;
};

// Mean cross-entropy over the rows of `x` and its gradient.
double SoftmaxLoss(const SoftmaxModel& model, const Eigen::MatrixXd& x,
                   std::span<const int> labels);
Eigen::MatrixXd SoftmaxGradient(const SoftmaxModel& model,
                                const Eigen::MatrixXd& x,
                                std::span<const int> labels);

struct TrainConfig {
  int rounds = 100;
  int local_epochs = 3;
  double learning_rate = 0.001;
  int batch_size = 64;
  uint64_t seed = 0;
};

// Minibatch gradient descent for `config.local_epochs` epochs; rows are
// reshuffled each epoch from Rng(MixSeed(seed, epoch)).
SoftmaxModel LocalUpdate(const SoftmaxModel& model, const Dataset& data,
                         const TrainConfig& config, uint64_t seed);

absl::StatusOr<SoftmaxModel> FedavgAggregate(
    std::span<const SoftmaxModel> models, std::span<const size_t> counts);

// Area under the ROC curve from scores of the positive class, with tied
// scores contributing one half.
double RocAuc(std::span<const double> scores, std::span<const int> labels);

struct EvalMetrics {
  double accuracy = 0.0;
  std::optional<double> rocauc;  // binary tasks only
};

EvalMetrics Evaluate(const SoftmaxModel& model, const Dataset& test);

struct RoundMetrics {
  int round = 0;
  EvalMetrics metrics;
};

struct TrainResult {
  SoftmaxModel model;
  std::vector<RoundMetrics> curve;  // round 0 is the initial model
};

// FedAvg with full participation. Client k in round r trains with seed
// MixSeed(MixSeed(config.seed, r), k). An optional callback receives the
// scalar count of each model exchange.
struct ModelExchangeHook {
  virtual ~ModelExchangeHook() = default;
  virtual void OnRound(int round, size_t client, size_t scalars) = 0;
};

absl::StatusOr<TrainResult> TrainFederated(std::span<const Dataset> shards,
                                           const Dataset& test,
                                           const TrainConfig& config,
                                           ModelExchangeHook* hook = nullptr);

// Side-by-side curves of two runs with the same round count:
// `round,raw_accuracy,augmented_accuracy[,raw_rocauc,augmented_rocauc]`.
std::string CurvesToCsv(std::span<const RoundMetrics> raw,
                        std::span<const RoundMetrics> augmented);

}  // namespace fedtab

#endif  // FEDTAB_FED_TRAIN_H_
