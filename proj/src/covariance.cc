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

#include "fedtab/covariance.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fedtab/random.h"

namespace fedtab {
namespace {

constexpr double kSymmetryTolerance = 1e-12;

}  // namespace

absl::StatusOr<LocalMoments> ComputeLocalMoments(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) {
    return absl::InvalidArgumentError(
        "cannot compute moments of an empty matrix");
  }
  const double n = static_cast<double>(x.rows());
  LocalMoments out;
  out.count = static_cast<size_t>(x.rows());
  out.mean = x.colwise().sum().transpose() / n;
  Eigen::MatrixXd m = x.transpose() * x / n;
  out.second_moment = 0.5 * (m + m.transpose());
  return out;
}

absl::StatusOr<GlobalCovariance> AggregateCovariance(
    std::span<const LocalMoments> moments, AggregateOptions options) {
  if (moments.empty()) {
    return absl::InvalidArgumentError("no client moments to aggregate");
  }
  const Eigen::Index l = moments.front().mean.size();
  size_t total = 0;
  for (size_t k = 0; k < moments.size(); ++k) {
    const LocalMoments& m = moments[k];
    if (m.mean.size() != l || m.second_moment.rows() != l ||
        m.second_moment.cols() != l) {
      return absl::FailedPreconditionError(absl::StrCat(
          "client ", k, " sent moments of dimension ", m.mean.size(),
          ", expected ", l));
    }
    if (m.count == 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("client ", k, " reported zero rows"));
    }
    total += m.count;
  }
  GlobalCovariance out;
  out.mean = Eigen::VectorXd::Zero(l);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(l, l);
  for (const LocalMoments& m : moments) {
    const double w = static_cast<double>(m.count) / static_cast<double>(total);
    out.mean += w * m.mean;
    second += w * m.second_moment;
  }
  Eigen::MatrixXd sigma = second - out.mean * out.mean.transpose();
  out.sigma = 0.5 * (sigma + sigma.transpose());
  if (options.clamp) {
    for (Eigen::Index i = 0; i < l; ++i) {
      for (Eigen::Index j = 0; j < l; ++j) {
        double& v = out.sigma(i, j);
        if (v > 1.0 || v < -1.0) {
          v = std::clamp(v, -1.0, 1.0);
          ++out.clamp_count;
        }
      }
    }
    out.clamped = out.clamp_count > 0;
  }
  return out;
}

absl::StatusOr<double> GaussianSigma(double epsilon, double delta,
                                     double sensitivity) {
  if (std::isnan(epsilon) || epsilon <= 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must be in (0, 1), got ", delta));
  }
  if (!(sensitivity >= 0.0) || !std::isfinite(sensitivity)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sensitivity must be finite and nonnegative, got ",
                     sensitivity));
  }
  if (std::isinf(epsilon)) return 0.0;
  return sensitivity * std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

void AddDpNoise(GlobalCovariance& covariance, double sigma, uint64_t seed) {
  covariance.noise_sigma = sigma;
  if (sigma == 0.0) return;
  Rng rng(seed);
  Eigen::MatrixXd& s = covariance.sigma;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = i; j < s.cols(); ++j) {
      s(i, j) += sigma * rng.Normal();
      s(j, i) = s(i, j);
    }
  }
}

absl::StatusOr<CholFactor> PsdCholesky(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) {
    return absl::InvalidArgumentError("covariance must be square");
  }
  const Eigen::Index l = sigma.rows();
  for (Eigen::Index i = 0; i < l; ++i) {
    for (Eigen::Index j = i + 1; j < l; ++j) {
      if (std::abs(sigma(i, j) - sigma(j, i)) > kSymmetryTolerance) {
        return absl::InvalidArgumentError(absl::StrCat(
            "covariance is not symmetric at (", i, ", ", j, ")"));
      }
    }
  }
  CholFactor out;
  if (l == 0) {
    out.u = Eigen::MatrixXd(0, 0);
    return out;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) {
    out.u = llt.matrixL();
    return out;
  }
  Eigen::MatrixXd jittered =
      sigma + kCholeskyJitter * Eigen::MatrixXd::Identity(l, l);
  llt.compute(jittered);
  if (llt.info() == Eigen::Success) {
    out.u = llt.matrixL();
    out.used_jitter = true;
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  if (eig.info() != Eigen::Success) {
    return absl::InternalError("eigendecomposition of covariance failed");
  }
  Eigen::VectorXd values = eig.eigenvalues();
  for (Eigen::Index i = 0; i < l; ++i) {
    if (values(i) < kEigenFloor) {
      out.repair_shift = std::max(out.repair_shift, kEigenFloor - values(i));
      values(i) = kEigenFloor;
    }
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::MatrixXd repaired = v * values.asDiagonal() * v.transpose();
  repaired = 0.5 * (repaired + repaired.transpose());
  out.eigen_repaired = true;
  llt.compute(repaired);
  if (llt.info() != Eigen::Success) {
    llt.compute(repaired + kCholeskyJitter * Eigen::MatrixXd::Identity(l, l));
    out.used_jitter = true;
    if (llt.info() != Eigen::Success) {
      return absl::InternalError("Cholesky failed after eigenvalue repair");
    }
  }
  out.u = llt.matrixL();
  return out;
}

}  // namespace fedtab
