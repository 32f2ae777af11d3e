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

// Federated variational-Bayes Gaussian mixture for a single real-valued
// column.
//
// The fit alternates client and server steps. Clients only ever emit
// per-mode sums (ClientEStats, ClientMStats); the server combines them with
// plain additions, so a federated fit equals the centralized fit on pooled
// data up to floating-point re-association.
//
//   server                            client
//   ------                            ------
//   broadcast ModeExpectations  --->  EStepLocal: responsibilities, sums
//   AggregateE                  <---  ClientEStats
//   broadcast (N_t, xbar_t)     --->  MStepLocal: scatter about xbar_t
//   AggregateM                  <---  ClientMStats
//   broadcast S_t; FinalizeRound, convergence flag
//
// Priors use the conjugate Dirichlet / Normal-Wishart family with D = 1, so
// the Wishart scale W is a positive scalar `w` and the expected precision of
// mode t is nu_t * w_t.

#ifndef FEDTAB_VB_GMM_H_
#define FEDTAB_VB_GMM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "fedtab/comm_ledger.h"

namespace fedtab {

struct GmmPrior {
  double alpha0 = 0.1;  // Dirichlet concentration per mode
  double beta0 = 1.0;   // mean precision scaling
  double m0 = 0.0;      // prior mean
  double w0 = 1.0;      // Wishart scale (D = 1)
  double nu0 = 3.0;     // Wishart degrees of freedom
  int max_modes = 10;   // T
  double conv_eps = 1e-4;
  int max_rounds = 2000;
  // Random starts; the fit with the highest final lower bound is kept.
  int num_inits = 3;
  double prune_threshold = 0.005;
  double sigma_floor = 1e-6;

  // alpha0 = 1 / max_modes, everything else at the defaults above.
  static GmmPrior Default(int max_modes = 10);
  absl::Status Validate() const;
};

struct GmmMode {
  // Variational parameters.
  double alpha = 0.0;
  double beta = 0.0;
  double nu = 0.0;
  double m = 0.0;
  double w = 0.0;
  // Derived point estimates.
  double pi = 0.0;
  double mu = 0.0;
  double sigma = 0.0;

  friend bool operator==(const GmmMode&, const GmmMode&) = default;
};

struct GmmPosterior {
  std::vector<GmmMode> modes;

  size_t num_modes() const { return modes.size(); }
  // Recomputes pi = alpha / sum(alpha), mu = m and
  // sigma = max((nu * w)^(-1/2), sigma_floor).
  void RefreshDerived(double sigma_floor);
  // Mixture mean and standard deviation from (pi, mu, sigma).
  double MixtureMean() const;
  double MixtureStddev() const;

  friend bool operator==(const GmmPosterior&, const GmmPosterior&) = default;
};

// Per-mode quantities the E step needs, i.e. what the server broadcasts at
// the start of a round (3T scalars):
//   ln rho_t(x) = log_offset_t - precision_t / 2 * (x - mean_t)^2
struct ModeExpectations {
  std::vector<double> log_offset;
  std::vector<double> mean;
  std::vector<double> precision;

  size_t num_modes() const { return mean.size(); }
  static constexpr int kScalarsPerMode = 3;
};

ModeExpectations ComputeExpectations(const GmmPosterior& posterior);

struct ClientEStats {
  std::vector<double> resp_sums;      // sum_n r_nt
  std::vector<double> weighted_sums;  // sum_n r_nt x_n
  double resp_entropy = 0.0;          // sum_n sum_t r_nt ln r_nt
  double row_count = 0.0;
  // Rows whose densities were all zero / non-finite; they get uniform
  // responsibilities. Diagnostic only, not part of the uploaded payload.
  uint64_t degenerate_rows = 0;

  // 2T sums plus entropy and row count.
  uint64_t ScalarCount() const { return 2 * resp_sums.size() + 2; }
};

struct ClientMStats {
  std::vector<double> scatter;  // sum_n r_nt (x_n - xbar_t)^2

  uint64_t ScalarCount() const { return scatter.size(); }
};

// E step on one client. When `responsibilities` is non-null it receives the
// row-major N x T responsibility matrix, which the client keeps for its M
// step.
ClientEStats EStepLocal(std::span<const double> values,
                        const ModeExpectations& expectations,
                        std::vector<double>* responsibilities = nullptr);
ClientEStats EStepLocal(std::span<const double> values,
                        const GmmPosterior& posterior,
                        std::vector<double>* responsibilities = nullptr);

// Server-side combination of the E-step sums.
struct AggregatedE {
  std::vector<double> counts;  // N_t
  std::vector<double> means;   // xbar_t (m0 for empty modes)
  std::vector<bool> empty;     // N_t < kEmptyModeMass
  double resp_entropy = 0.0;
  double row_count = 0.0;

  static constexpr double kEmptyModeMass = 1e-12;
};

// Sums client contributions in the order given.
AggregatedE AggregateE(std::span<const ClientEStats> stats,
                       const GmmPrior& prior);

struct MStepResult {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> nu;
  std::vector<double> m;
  ClientMStats stats;
};

// M step on one client: conjugate updates from the aggregated counts and
// the client's scatter about the global per-mode means.
MStepResult MStepLocal(const AggregatedE& aggregated,
                       std::span<const double> values,
                       std::span<const double> responsibilities,
                       const GmmPrior& prior);

// S_t = (1 / N_t) * sum of client scatters; empty modes get 1 / w0.
std::vector<double> AggregateM(std::span<const ClientMStats> stats,
                               const AggregatedE& aggregated,
                               const GmmPrior& prior);

struct ElboValue {
  double value = 0.0;
  int round = 0;
};

struct RoundResult {
  GmmPosterior posterior;
  ElboValue elbo;
};

// Applies the conjugate updates (alpha, beta, nu, m, w) for every mode and
// evaluates the variational lower bound of the resulting posterior against
// the responsibilities summarized in `aggregated`. The incoming posterior
// fixes the mode count. Fails if an updated Wishart scale is not positive.
absl::StatusOr<RoundResult> FinalizeRound(const GmmPosterior& posterior,
                                          const AggregatedE& aggregated,
                                          std::span<const double> scatter,
                                          const GmmPrior& prior, int round);

// Standard variational lower bound for a univariate VB-GMM.
double EvidenceLowerBound(const GmmPosterior& posterior,
                          const AggregatedE& aggregated,
                          std::span<const double> scatter,
                          const GmmPrior& prior);

struct GmmFit {
  GmmPosterior posterior;     // pruned, in data units
  int rounds = 0;             // summed over all starts
  int chosen_init = 0;
  bool converged = false;
  double final_elbo = 0.0;
  std::vector<double> elbo_trace;  // of the chosen start
  double data_min = 0.0;
  double data_max = 0.0;
  uint64_t degenerate_rows = 0;
};

struct GmmFitOptions {
  uint64_t seed = 0;
  // Optional transfer accounting.
  CommLedger* ledger = nullptr;
};

// Local extent of one client's column, uploaded once before the rounds.
struct ColumnSummary {
  static constexpr size_t kScalars = 3;
  double min = 0.0;  // +inf for an empty shard
  double max = 0.0;  // -inf for an empty shard
  uint64_t count = 0;
};

// Client half of the federated fit for one column. It keeps the rows and
// the responsibilities; the server only exchanges messages with it.
class GmmClientSession {
 public:
  explicit GmmClientSession(std::span<const double> values) : raw_(values) {}

  ColumnSummary Summarize() const;
  // Global frame broadcast by the server: values become (x - center) / scale.
  void SetFrame(double center, double scale);
  ClientEStats EStep(const ModeExpectations& expectations);
  ClientMStats MStep(const AggregatedE& aggregated, const GmmPrior& prior);

 private:
  std::span<const double> raw_;
  std::vector<double> local_;
  std::vector<double> resp_;
};

// Server side of the protocol, driving the sessions in fixed order until
// |L - L_last| < conv_eps or max_rounds, once per start.
absl::StatusOr<GmmFit> FitFederatedGmm(
    std::span<GmmClientSession* const> clients, const GmmPrior& prior,
    const GmmFitOptions& options = {});

// Runs the federated protocol over the shards (one per client, in fixed
// order) until |L - L_last| < conv_eps or max_rounds. Empty shards take part
// but contribute nothing. The fit operates on values centered at the global
// midrange and scaled by the global half-range, so the prior is expressed
// relative to the column's spread; the returned posterior is mapped back to
// data units. A constant column yields a single mode with sigma_floor.
absl::StatusOr<GmmFit> FitFederatedGmm(
    std::span<const std::span<const double>> shards, const GmmPrior& prior,
    const GmmFitOptions& options = {});

// Keeps modes with pi >= threshold and renormalizes pi. If every mode falls
// below the threshold the heaviest one is kept.
GmmPosterior PruneModes(const GmmPosterior& posterior, double threshold,
                        double sigma_floor);

}  // namespace fedtab

#endif  // FEDTAB_VB_GMM_H_
