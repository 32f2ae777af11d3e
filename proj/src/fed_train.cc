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

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fedtab/csv_io.h"
#include "fedtab/random.h"

namespace fedtab {
namespace {

Eigen::MatrixXd WithBias(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()).setOnes();
  return out;
}

}  // namespace

absl::StatusOr<Featurizer> Featurizer::Create(
    Schema schema, std::vector<ContinuousScale> scales,
    std::vector<std::vector<std::string>> categories) {
  if (scales.size() != schema.num_continuous() ||
      categories.size() != schema.num_discrete()) {
    return absl::InvalidArgumentError(
        "featurizer statistics do not cover the schema");
  }
  for (ContinuousScale& s : scales) {
    if (!std::isfinite(s.mean) || !std::isfinite(s.stddev)) {
      return absl::InvalidArgumentError("non-finite feature scale");
    }
    if (!(s.stddev > 0.0)) s.stddev = 1.0;
  }
  Featurizer f(std::move(schema));
  f.scales_ = std::move(scales);
  f.feature_dim_ = f.scales_.size();
  for (size_t j = 0; j < categories.size(); ++j) {
    std::vector<std::string>& cats = categories[j];
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
    const size_t column = f.schema_.discrete_indices()[j];
    if (column == f.schema_.label_index()) {
      if (cats.empty()) {
        return absl::InvalidArgumentError("label column has no classes");
      }
      f.classes_ = std::move(cats);
      continue;
    }
    f.one_hot_.push_back({column, f.feature_dim_, std::move(cats)});
    f.feature_dim_ += f.one_hot_.back().categories.size();
  }
  return f;
}

absl::StatusOr<Dataset> Featurizer::Featurize(const Table& table) const {
  if (!(table.schema() == schema_)) {
    return absl::InvalidArgumentError("table schema does not match featurizer");
  }
  const size_t n = table.num_rows();
  Dataset out;
  out.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                static_cast<Eigen::Index>(feature_dim_));
  for (size_t i = 0; i < scales_.size(); ++i) {
    std::span<const double> values =
        table.Continuous(schema_.continuous_indices()[i]);
    for (size_t r = 0; r < n; ++r) {
      out.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) =
          (values[r] - scales_[i].mean) / scales_[i].stddev;
    }
  }
  for (const OneHot& block : one_hot_) {
    std::span<const std::string> tokens = table.Discrete(block.column);
    for (size_t r = 0; r < n; ++r) {
      auto it = std::lower_bound(block.categories.begin(),
                                 block.categories.end(), tokens[r]);
      if (it == block.categories.end() || *it != tokens[r]) {
        ++out.unseen_categories;
        continue;
      }
      out.x(static_cast<Eigen::Index>(r),
            static_cast<Eigen::Index>(block.offset +
                                      (it - block.categories.begin()))) = 1.0;
    }
  }
  out.labels.reserve(n);
  for (const std::string& label : table.Labels()) {
    auto it = std::lower_bound(classes_.begin(), classes_.end(), label);
    if (it == classes_.end() || *it != label) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown label '", label, "'"));
    }
    out.labels.push_back(static_cast<int>(it - classes_.begin()));
  }
  return out;
}

SoftmaxModel SoftmaxModel::Zeros(size_t feature_dim, size_t num_classes) {
  return {Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(feature_dim + 1),
                                static_cast<Eigen::Index>(num_classes))};
}

Eigen::MatrixXd SoftmaxModel::Probabilities(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd logits = WithBias(x) * weights;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double max = logits.row(r).maxCoeff();
    logits.row(r) = (logits.row(r).array() - max).exp();
    logits.row(r) /= logits.row(r).sum();
  }
  return logits;
}

double SoftmaxLoss(const SoftmaxModel& model, const Eigen::MatrixXd& x,
                   std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  const Eigen::MatrixXd logits = WithBias(x) * model.weights;
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double max = logits.row(r).maxCoeff();
    const double lse =
        max + std::log((logits.row(r).array() - max).exp().sum());
    total += lse - logits(r, labels[static_cast<size_t>(r)]);
  }
  return total / static_cast<double>(labels.size());
}

Eigen::MatrixXd SoftmaxGradient(const SoftmaxModel& model,
                                const Eigen::MatrixXd& x,
                                std::span<const int> labels) {
  if (labels.empty()) {
    return Eigen::MatrixXd::Zero(model.weights.rows(), model.weights.cols());
  }
  Eigen::MatrixXd residual = model.Probabilities(x);
  for (size_t r = 0; r < labels.size(); ++r) {
    residual(static_cast<Eigen::Index>(r), labels[r]) -= 1.0;
  }
  return WithBias(x).transpose() * residual /
         static_cast<double>(labels.size());
}

SoftmaxModel LocalUpdate(const SoftmaxModel& model, const Dataset& data,
                         const TrainConfig& config, uint64_t seed) {
  SoftmaxModel out = model;
  const size_t n = data.size();
  if (n == 0) return out;
  const size_t batch = static_cast<size_t>(std::max(1, config.batch_size));
  std::vector<size_t> order(n);
  Eigen::MatrixXd xb;
  std::vector<int> yb;
  for (int epoch = 0; epoch < config.local_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(MixSeed(seed, static_cast<uint64_t>(epoch)));
    for (size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[rng.UniformInt(i)]);
    }
    for (size_t start = 0; start < n; start += batch) {
      const size_t rows = std::min(batch, n - start);
      xb.resize(static_cast<Eigen::Index>(rows), data.x.cols());
      yb.resize(rows);
      for (size_t r = 0; r < rows; ++r) {
        xb.row(static_cast<Eigen::Index>(r)) =
            data.x.row(static_cast<Eigen::Index>(order[start + r]));
        yb[r] = data.labels[order[start + r]];
      }
      out.weights -= config.learning_rate * SoftmaxGradient(out, xb, yb);
    }
  }
  return out;
}

absl::StatusOr<SoftmaxModel> FedavgAggregate(
    std::span<const SoftmaxModel> models, std::span<const size_t> counts) {
  if (models.empty() || models.size() != counts.size()) {
    return absl::InvalidArgumentError(
        "FedAvg needs one count per model and at least one model");
  }
  const size_t total = std::accumulate(counts.begin(), counts.end(), size_t{0});
  if (total == 0) {
    return absl::InvalidArgumentError("FedAvg counts sum to zero");
  }
  SoftmaxModel out{Eigen::MatrixXd::Zero(models[0].weights.rows(),
                                         models[0].weights.cols())};
  for (size_t k = 0; k < models.size(); ++k) {
    if (models[k].weights.rows() != out.weights.rows() ||
        models[k].weights.cols() != out.weights.cols()) {
      return absl::InvalidArgumentError(
          absl::StrCat("model ", k, " has a mismatched shape"));
    }
    out.weights += (static_cast<double>(counts[k]) /
                    static_cast<double>(total)) *
                   models[k].weights;
  }
  return out;
}

double RocAuc(std::span<const double> scores, std::span<const int> labels) {
  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  size_t positives = 0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1..j
    for (size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        positive_rank_sum += rank;
        ++positives;
      }
    }
    i = j;
  }
  const size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) /
         (p * static_cast<double>(negatives));
}

EvalMetrics Evaluate(const SoftmaxModel& model, const Dataset& test) {
  EvalMetrics out;
  if (test.size() == 0) return out;
  const Eigen::MatrixXd probs = model.Probabilities(test.x);
  size_t correct = 0;
  for (size_t r = 0; r < test.size(); ++r) {
    Eigen::Index best = 0;
    probs.row(static_cast<Eigen::Index>(r)).maxCoeff(&best);
    if (best == test.labels[r]) ++correct;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  if (model.num_classes() == 2) {
    std::vector<double> scores(test.size());
    for (size_t r = 0; r < test.size(); ++r) {
      scores[r] = probs(static_cast<Eigen::Index>(r), 1);
    }
    const double auc = RocAuc(scores, test.labels);
    if (!std::isnan(auc)) out.rocauc = auc;
  }
  return out;
}

absl::StatusOr<TrainResult> TrainFederated(std::span<const Dataset> shards,
                                           const Dataset& test,
                                           const TrainConfig& config,
                                           ModelExchangeHook* hook) {
  if (shards.empty()) {
    return absl::InvalidArgumentError("no client shards to train on");
  }
  if (config.rounds < 0 || config.local_epochs < 0 || config.batch_size < 1 ||
      !(config.learning_rate > 0.0)) {
    return absl::InvalidArgumentError("invalid training configuration");
  }
  const Eigen::Index d = shards.front().x.cols();
  size_t num_classes = 0;
  for (const Dataset& shard : shards) {
    if (shard.x.cols() != d) {
      return absl::InvalidArgumentError("shards disagree on feature width");
    }
    for (int y : shard.labels) {
      num_classes = std::max(num_classes, static_cast<size_t>(y) + 1);
    }
  }
  for (int y : test.labels) {
    num_classes = std::max(num_classes, static_cast<size_t>(y) + 1);
  }
  TrainResult result;
  result.model = SoftmaxModel::Zeros(static_cast<size_t>(d), num_classes);
  result.curve.push_back({0, Evaluate(result.model, test)});
  const size_t scalars = static_cast<size_t>(result.model.weights.size());

  std::vector<SoftmaxModel> local(shards.size());
  std::vector<size_t> counts(shards.size());
  for (size_t k = 0; k < shards.size(); ++k) counts[k] = shards[k].size();
  for (int round = 1; round <= config.rounds; ++round) {
    const uint64_t round_seed =
        MixSeed(config.seed, static_cast<uint64_t>(round));
    std::vector<std::future<SoftmaxModel>> jobs;
    jobs.reserve(shards.size());
    for (size_t k = 0; k < shards.size(); ++k) {
      jobs.push_back(std::async(std::launch::async, [&, k] {
        return LocalUpdate(result.model, shards[k], config,
                           MixSeed(round_seed, k));
      }));
    }
    for (size_t k = 0; k < shards.size(); ++k) {
      local[k] = jobs[k].get();
      if (hook != nullptr) hook->OnRound(round, k, scalars);
    }
    absl::StatusOr<SoftmaxModel> merged = FedavgAggregate(local, counts);
    if (!merged.ok()) return merged.status();
    result.model = *std::move(merged);
    result.curve.push_back({round, Evaluate(result.model, test)});
  }
  return result;
}

std::string CurvesToCsv(std::span<const RoundMetrics> raw,
                        std::span<const RoundMetrics> augmented) {
  const size_t n = std::min(raw.size(), augmented.size());
  const bool has_auc = n > 0 && raw.front().metrics.rocauc.has_value();
  std::string out = has_auc ? "round,raw_accuracy,augmented_accuracy,"
                              "raw_rocauc,augmented_rocauc\n"
                            : "round,raw_accuracy,augmented_accuracy\n";
  auto auc = [](const EvalMetrics& m) {
    return m.rocauc ? FormatDouble(*m.rocauc) : std::string();
  };
  for (size_t i = 0; i < n; ++i) {
    absl::StrAppend(&out, raw[i].round, ",",
                    FormatDouble(raw[i].metrics.accuracy), ",",
                    FormatDouble(augmented[i].metrics.accuracy));
    if (has_auc) {
      absl::StrAppend(&out, ",", auc(raw[i].metrics), ",",
                      auc(augmented[i].metrics));
    }
    out += "\n";
  }
  return out;
}

}  // namespace fedtab
