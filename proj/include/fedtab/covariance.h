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

#ifndef FEDTAB_COVARIANCE_H_
#define FEDTAB_COVARIANCE_H_

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "absl/status/statusor.h"

namespace fedtab {

// First and second moments of one client's encoded matrix, both normalized
// by the client's row count.
struct LocalMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd second_moment;
  size_t count = 0;

  size_t dim() const { return static_cast<size_t>(mean.size()); }
  // Scalars uploaded for this message: l for the mean, l^2 for the second
  // moment.
  size_t ScalarCount() const { return dim() * (dim() + 1); }
};

absl::StatusOr<LocalMoments> ComputeLocalMoments(const Eigen::MatrixXd& x);

struct GlobalCovariance {
  Eigen::MatrixXd sigma;
  Eigen::VectorXd mean;
  bool clamped = false;
  size_t clamp_count = 0;
  // Standard deviation of the noise added to the upper triangle; 0 when no
  // noise was applied.
  double noise_sigma = 0.0;
};

struct AggregateOptions {
  bool clamp = true;
};

// Count-weighted combination of client moments:
//   E[X] = sum_k (N_k / N) mean_k,  E[X^T X] = sum_k (N_k / N) M_k,
//   Sigma = E[X^T X] - E[X] E[X]^T,
// symmetrized and, by default, clamped entrywise to [-1, 1].
absl::StatusOr<GlobalCovariance> AggregateCovariance(
    std::span<const LocalMoments> moments, AggregateOptions options = {});

// Gaussian-mechanism noise scale sensitivity * sqrt(2 ln(1.25 / delta)) /
// epsilon. An infinite epsilon yields 0.
absl::StatusOr<double> GaussianSigma(double epsilon, double delta,
                                     double sensitivity = 2.0);

// Adds N(0, sigma^2) to every upper-triangle entry (diagonal included) and
// mirrors it. sigma = 0 leaves the matrix untouched.
void AddDpNoise(GlobalCovariance& covariance, double sigma, uint64_t seed);

struct CholFactor {
  Eigen::MatrixXd u;  // lower triangular, Sigma = U U^T
  double repair_shift = 0.0;
  bool used_jitter = false;
  bool eigen_repaired = false;
};

inline constexpr double kCholeskyJitter = 1e-12;
inline constexpr double kEigenFloor = 1e-9;

// Cholesky factor of a symmetric matrix, repairing indefiniteness by
// clipping eigenvalues up to kEigenFloor when the plain factorization fails.
absl::StatusOr<CholFactor> PsdCholesky(const Eigen::MatrixXd& sigma);

}  // namespace fedtab

#endif  // FEDTAB_COVARIANCE_H_
