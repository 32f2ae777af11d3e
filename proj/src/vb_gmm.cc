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

#include "fedtab/vb_gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "absl/strings/str_cat.h"
#include "boost/math/special_functions/digamma.hpp"
#include "boost/math/special_functions/gamma.hpp"
#include "fedtab/random.h"

namespace fedtab {
namespace {

constexpr double kLn2 = std::numbers::ln2;
const double kLn2Pi = std::log(2.0 * std::numbers::pi);

double Digamma(double x) { return boost::math::digamma(x); }
double LogGammaFn(double x) { return boost::math::lgamma(x); }

// E[ln Lambda] for a univariate Wishart(w, nu).
double ExpectedLogPrecision(double nu, double w) {
  return Digamma(0.5 * nu) + kLn2 + std::log(w);
}

// ln B(w, nu) for D = 1.
double LogWishartNorm(double w, double nu) {
  return -0.5 * nu * std::log(w) - 0.5 * nu * kLn2 - LogGammaFn(0.5 * nu);
}

double LogDirichletNorm(std::span<const double> alpha) {
  double total = 0.0;
  double sum_lgamma = 0.0;
  for (double a : alpha) {
    total += a;
    sum_lgamma += LogGammaFn(a);
  }
  return LogGammaFn(total) - sum_lgamma;
}

// Maps a posterior fitted on z = (x - center) / scale back to x.
GmmPosterior ToDataUnits(const GmmPosterior& posterior, double center,
                         double scale, double sigma_floor) {
  GmmPosterior out = posterior;
  for (GmmMode& mode : out.modes) {
    mode.m = center + scale * mode.m;
    mode.w = mode.w / (scale * scale);
  }
  out.RefreshDerived(sigma_floor);
  return out;
}

// Start `init` of a fit in the standardized frame. Means are evenly spaced
// over [-1, 1] with a seeded quarter-spacing jitter; the `rows` pseudo-counts
// are spread over the modes by a flat Dirichlet draw, so the starting weights
// differ and duplicate modes do not stay tied. Every mode starts with unit
// expected precision (the whole half-range).
GmmPosterior InitialPosterior(const GmmPrior& prior, double rows,
                              uint64_t seed, int init) {
  const int t_count = prior.max_modes;
  const double spacing = 2.0 / t_count;
  Rng rng(MixSeed(seed, 0x6a11 + static_cast<uint64_t>(init)));
  GmmPosterior posterior;
  posterior.modes.resize(t_count);
  std::vector<double> share(t_count);
  double share_total = 0.0;
  for (int t = 0; t < t_count; ++t) {
    posterior.modes[t].m =
        -1.0 + spacing * (t + 0.5) + spacing * rng.Uniform(-0.25, 0.25);
    share[t] = std::exp(rng.LogGamma(1.0));
    share_total += share[t];
  }
  for (int t = 0; t < t_count; ++t) {
    GmmMode& mode = posterior.modes[t];
    const double n_t = rows * share[t] / share_total;
    mode.alpha = prior.alpha0 + n_t;
    mode.beta = prior.beta0 + n_t;
    mode.nu = prior.nu0 + n_t;
    mode.w = 1.0 / mode.nu;
  }
  posterior.RefreshDerived(prior.sigma_floor);
  return posterior;
}

}  // namespace

GmmPrior GmmPrior::Default(int max_modes) {
  GmmPrior prior;
  prior.max_modes = max_modes;
  prior.alpha0 = 1.0 / std::max(max_modes, 1);
  return prior;
}

absl::Status GmmPrior::Validate() const {
  if (!(alpha0 > 0) || !(beta0 > 0) || !(w0 > 0) || !(nu0 > 0) ||
      !std::isfinite(m0)) {
    return absl::InvalidArgumentError(
        "GMM prior needs alpha0, beta0, w0, nu0 > 0 and a finite m0");
  }
  if (max_modes < 1) {
    return absl::InvalidArgumentError("GMM needs at least one mode");
  }
  if (!(conv_eps > 0) || max_rounds < 1 || num_inits < 1) {
    return absl::InvalidArgumentError(
        "GMM convergence tolerance, round limit and start count must be "
        "positive");
  }
  if (!(prune_threshold >= 0 && prune_threshold < 1) || !(sigma_floor > 0)) {
    return absl::InvalidArgumentError(
        "GMM prune threshold must be in [0, 1) and sigma floor positive");
  }
  return absl::OkStatus();
}

void GmmPosterior::RefreshDerived(double sigma_floor) {
  double total = 0.0;
  for (const GmmMode& mode : modes) total += mode.alpha;
  for (GmmMode& mode : modes) {
    mode.pi = mode.alpha / total;
    mode.mu = mode.m;
    mode.sigma = std::max(1.0 / std::sqrt(mode.nu * mode.w), sigma_floor);
  }
}

double GmmPosterior::MixtureMean() const {
  double mean = 0.0;
  for (const GmmMode& mode : modes) mean += mode.pi * mode.mu;
  return mean;
}

double GmmPosterior::MixtureStddev() const {
  const double mean = MixtureMean();
  double second = 0.0;
  for (const GmmMode& mode : modes) {
    second += mode.pi * (mode.sigma * mode.sigma + mode.mu * mode.mu);
  }
  return std::sqrt(std::max(second - mean * mean, 0.0));
}

ModeExpectations ComputeExpectations(const GmmPosterior& posterior) {
  const size_t t_count = posterior.num_modes();
  ModeExpectations out;
  out.log_offset.resize(t_count);
  out.mean.resize(t_count);
  out.precision.resize(t_count);
  double alpha_total = 0.0;
  for (const GmmMode& mode : posterior.modes) alpha_total += mode.alpha;
  const double digamma_total = Digamma(alpha_total);
  for (size_t t = 0; t < t_count; ++t) {
    const GmmMode& mode = posterior.modes[t];
    const double log_weight = Digamma(mode.alpha) - digamma_total;
    const double log_precision = ExpectedLogPrecision(mode.nu, mode.w);
    out.log_offset[t] = log_weight + 0.5 * log_precision - 0.5 * kLn2Pi -
                        0.5 / mode.beta;
    out.mean[t] = mode.m;
    out.precision[t] = mode.nu * mode.w;
  }
  return out;
}

ClientEStats EStepLocal(std::span<const double> values,
                        const ModeExpectations& expectations,
                        std::vector<double>* responsibilities) {
  const size_t t_count = expectations.num_modes();
  ClientEStats stats;
  stats.resp_sums.assign(t_count, 0.0);
  stats.weighted_sums.assign(t_count, 0.0);
  stats.row_count = static_cast<double>(values.size());
  if (responsibilities != nullptr) {
    responsibilities->assign(values.size() * t_count, 0.0);
  }
  std::vector<double> log_rho(t_count);
  for (size_t n = 0; n < values.size(); ++n) {
    const double x = values[n];
    double peak = -std::numeric_limits<double>::infinity();
    for (size_t t = 0; t < t_count; ++t) {
      const double d = x - expectations.mean[t];
      log_rho[t] = expectations.log_offset[t] -
                   0.5 * expectations.precision[t] * d * d;
      if (log_rho[t] > peak) peak = log_rho[t];
    }
    double* row = responsibilities != nullptr
                      ? responsibilities->data() + n * t_count
                      : nullptr;
    if (!std::isfinite(peak)) {
      ++stats.degenerate_rows;
      const double uniform = 1.0 / static_cast<double>(t_count);
      for (size_t t = 0; t < t_count; ++t) {
        stats.resp_sums[t] += uniform;
        stats.weighted_sums[t] += uniform * x;
        stats.resp_entropy += uniform * std::log(uniform);
        if (row != nullptr) row[t] = uniform;
      }
      continue;
    }
    double norm = 0.0;
    for (size_t t = 0; t < t_count; ++t) {
      log_rho[t] = std::exp(log_rho[t] - peak);
      norm += log_rho[t];
    }
    for (size_t t = 0; t < t_count; ++t) {
      const double r = log_rho[t] / norm;
      stats.resp_sums[t] += r;
      stats.weighted_sums[t] += r * x;
      if (r > 0.0) stats.resp_entropy += r * std::log(r);
      if (row != nullptr) row[t] = r;
    }
  }
  return stats;
}

ClientEStats EStepLocal(std::span<const double> values,
                        const GmmPosterior& posterior,
                        std::vector<double>* responsibilities) {
  return EStepLocal(values, ComputeExpectations(posterior), responsibilities);
}

AggregatedE AggregateE(std::span<const ClientEStats> stats,
                       const GmmPrior& prior) {
  AggregatedE out;
  if (stats.empty()) return out;
  const size_t t_count = stats.front().resp_sums.size();
  out.counts.assign(t_count, 0.0);
  std::vector<double> weighted(t_count, 0.0);
  for (const ClientEStats& client : stats) {
    for (size_t t = 0; t < t_count; ++t) {
      out.counts[t] += client.resp_sums[t];
      weighted[t] += client.weighted_sums[t];
    }
    out.resp_entropy += client.resp_entropy;
    out.row_count += client.row_count;
  }
  out.means.resize(t_count);
  out.empty.resize(t_count);
  for (size_t t = 0; t < t_count; ++t) {
    out.empty[t] = out.counts[t] < AggregatedE::kEmptyModeMass;
    out.means[t] = out.empty[t] ? prior.m0 : weighted[t] / out.counts[t];
  }
  return out;
}

MStepResult MStepLocal(const AggregatedE& aggregated,
                       std::span<const double> values,
                       std::span<const double> responsibilities,
                       const GmmPrior& prior) {
  const size_t t_count = aggregated.counts.size();
  MStepResult out;
  out.alpha.resize(t_count);
  out.beta.resize(t_count);
  out.nu.resize(t_count);
  out.m.resize(t_count);
  out.stats.scatter.assign(t_count, 0.0);
  for (size_t t = 0; t < t_count; ++t) {
    const double n_t = aggregated.counts[t];
    out.alpha[t] = prior.alpha0 + n_t;
    out.beta[t] = prior.beta0 + n_t;
    out.nu[t] = prior.nu0 + n_t;
    out.m[t] = (prior.beta0 * prior.m0 + n_t * aggregated.means[t]) /
               out.beta[t];
  }
  for (size_t n = 0; n < values.size(); ++n) {
    const double* row = responsibilities.data() + n * t_count;
    for (size_t t = 0; t < t_count; ++t) {
      const double d = values[n] - aggregated.means[t];
      out.stats.scatter[t] += row[t] * d * d;
    }
  }
  return out;
}

std::vector<double> AggregateM(std::span<const ClientMStats> stats,
                               const AggregatedE& aggregated,
                               const GmmPrior& prior) {
  const size_t t_count = aggregated.counts.size();
  std::vector<double> total(t_count, 0.0);
  for (const ClientMStats& client : stats) {
    for (size_t t = 0; t < t_count; ++t) total[t] += client.scatter[t];
  }
  for (size_t t = 0; t < t_count; ++t) {
    total[t] = aggregated.empty[t] ? 1.0 / prior.w0
                                   : total[t] / aggregated.counts[t];
  }
  return total;
}

double EvidenceLowerBound(const GmmPosterior& posterior,
                          const AggregatedE& aggregated,
                          std::span<const double> scatter,
                          const GmmPrior& prior) {
  const size_t t_count = posterior.num_modes();
  std::vector<double> alpha(t_count);
  double alpha_total = 0.0;
  for (size_t t = 0; t < t_count; ++t) {
    alpha[t] = posterior.modes[t].alpha;
    alpha_total += alpha[t];
  }
  const double digamma_total = Digamma(alpha_total);
  const std::vector<double> alpha0(t_count, prior.alpha0);

  double log_lik = 0.0;       // E[ln p(X | Z, mu, Lambda)]
  double log_p_z = 0.0;       // E[ln p(Z | pi)]
  double sum_log_pi = 0.0;
  double log_p_mu_lambda = 0.0;
  double sum_log_lambda = 0.0;
  double log_q_pi = 0.0;
  double log_q_mu_lambda = 0.0;
  for (size_t t = 0; t < t_count; ++t) {
    const GmmMode& mode = posterior.modes[t];
    const double n_t = aggregated.counts[t];
    const double log_pi = Digamma(mode.alpha) - digamma_total;
    const double log_lambda = ExpectedLogPrecision(mode.nu, mode.w);
    const double precision = mode.nu * mode.w;
    const double mean_gap = aggregated.means[t] - mode.m;
    if (n_t > 0.0) {
      log_lik += 0.5 * n_t *
                 (log_lambda - 1.0 / mode.beta -
                  precision * (scatter[t] + mean_gap * mean_gap) - kLn2Pi);
    }
    log_p_z += n_t * log_pi;
    sum_log_pi += log_pi;
    sum_log_lambda += log_lambda;
    const double prior_gap = mode.m - prior.m0;
    log_p_mu_lambda += 0.5 * (std::log(prior.beta0) - kLn2Pi + log_lambda -
                              prior.beta0 / mode.beta -
                              prior.beta0 * precision * prior_gap * prior_gap);
    log_p_mu_lambda -= 0.5 * mode.nu * mode.w / prior.w0;
    log_q_pi += (mode.alpha - 1.0) * log_pi;
    const double entropy_lambda = -LogWishartNorm(mode.w, mode.nu) -
                                  0.5 * (mode.nu - 2.0) * log_lambda +
                                  0.5 * mode.nu;
    log_q_mu_lambda += 0.5 * log_lambda +
                       0.5 * (std::log(mode.beta) - kLn2Pi) - 0.5 -
                       entropy_lambda;
  }
  const double log_p_pi =
      LogDirichletNorm(alpha0) + (prior.alpha0 - 1.0) * sum_log_pi;
  log_p_mu_lambda += static_cast<double>(t_count) *
                         LogWishartNorm(prior.w0, prior.nu0) +
                     0.5 * (prior.nu0 - 2.0) * sum_log_lambda;
  log_q_pi += LogDirichletNorm(alpha);
  const double log_q_z = aggregated.resp_entropy;

  return log_lik + log_p_z + log_p_pi + log_p_mu_lambda - log_q_z - log_q_pi -
         log_q_mu_lambda;
}

absl::StatusOr<RoundResult> FinalizeRound(const GmmPosterior& posterior,
                                          const AggregatedE& aggregated,
                                          std::span<const double> scatter,
                                          const GmmPrior& prior, int round) {
  const size_t t_count = posterior.num_modes();
  if (aggregated.counts.size() != t_count || scatter.size() != t_count) {
    return absl::InvalidArgumentError(absl::StrCat(
        "mode count mismatch: posterior has ", t_count, " modes, statistics ",
        aggregated.counts.size(), " / ", scatter.size()));
  }
  RoundResult out;
  out.posterior.modes.resize(t_count);
  for (size_t t = 0; t < t_count; ++t) {
    const double n_t = aggregated.counts[t];
    GmmMode& mode = out.posterior.modes[t];
    mode.alpha = prior.alpha0 + n_t;
    mode.beta = prior.beta0 + n_t;
    mode.nu = prior.nu0 + n_t;
    mode.m = (prior.beta0 * prior.m0 + n_t * aggregated.means[t]) / mode.beta;
    const double gap = aggregated.means[t] - prior.m0;
    const double w_inv = 1.0 / prior.w0 +
                         prior.beta0 * n_t / (prior.beta0 + n_t) * gap * gap +
                         n_t * scatter[t];
    if (!(w_inv > 0.0) || !std::isfinite(w_inv)) {
      return absl::InternalError(absl::StrCat(
          "Wishart scale update for mode ", t, " is not positive (",
          w_inv, "); check the prior"));
    }
    mode.w = 1.0 / w_inv;
  }
  out.posterior.RefreshDerived(prior.sigma_floor);
  out.elbo.value =
      EvidenceLowerBound(out.posterior, aggregated, scatter, prior);
  out.elbo.round = round;
  if (!std::isfinite(out.elbo.value)) {
    return absl::InternalError(
        absl::StrCat("lower bound is not finite in round ", round));
  }
  return out;
}

GmmPosterior PruneModes(const GmmPosterior& posterior, double threshold,
                        double sigma_floor) {
  GmmPosterior out;
  for (const GmmMode& mode : posterior.modes) {
    if (mode.pi >= threshold) out.modes.push_back(mode);
  }
  if (out.modes.empty() && !posterior.modes.empty()) {
    out.modes.push_back(*std::max_element(
        posterior.modes.begin(), posterior.modes.end(),
        [](const GmmMode& a, const GmmMode& b) { return a.pi < b.pi; }));
  }
  out.RefreshDerived(sigma_floor);
  return out;
}

ColumnSummary GmmClientSession::Summarize() const {
  ColumnSummary out;
  out.min = std::numeric_limits<double>::infinity();
  out.max = -std::numeric_limits<double>::infinity();
  for (double v : raw_) {
    out.min = std::min(out.min, v);
    out.max = std::max(out.max, v);
  }
  out.count = raw_.size();
  return out;
}

void GmmClientSession::SetFrame(double center, double scale) {
  local_.clear();
  local_.reserve(raw_.size());
  for (double v : raw_) local_.push_back((v - center) / scale);
}

ClientEStats GmmClientSession::EStep(const ModeExpectations& expectations) {
  return EStepLocal(local_, expectations, &resp_);
}

ClientMStats GmmClientSession::MStep(const AggregatedE& aggregated,
                                     const GmmPrior& prior) {
  return MStepLocal(aggregated, local_, resp_, prior).stats;
}

absl::StatusOr<GmmFit> FitFederatedGmm(
    std::span<GmmClientSession* const> clients, const GmmPrior& prior,
    const GmmFitOptions& options) {
  if (absl::Status s = prior.Validate(); !s.ok()) return s;
  if (clients.empty()) {
    return absl::InvalidArgumentError("GMM fit needs at least one shard");
  }
  CommLedger* ledger = options.ledger;
  const int num_clients = static_cast<int>(clients.size());

  // Setup exchange: each client reports its local extent; the server
  // broadcasts the global (center, scale).
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  double rows = 0.0;
  for (int k = 0; k < num_clients; ++k) {
    const ColumnSummary summary = clients[k]->Summarize();
    lo = std::min(lo, summary.min);
    hi = std::max(hi, summary.max);
    rows += static_cast<double>(summary.count);
    if (ledger != nullptr) {
      ledger->Record(Phase::kGmmInit, Direction::kUpload, k,
                     ColumnSummary::kScalars);
    }
  }
  if (rows == 0.0) {
    return absl::InvalidArgumentError("GMM fit needs at least one value");
  }

  GmmFit fit;
  fit.data_min = lo;
  fit.data_max = hi;
  if (!(hi > lo)) {
    GmmMode mode;
    mode.alpha = prior.alpha0 + rows;
    mode.beta = prior.beta0 + rows;
    mode.nu = prior.nu0 + rows;
    mode.m = lo;
    // Collapse the spread onto the floor: nu * w = sigma_floor^-2.
    mode.w = 1.0 / (mode.nu * prior.sigma_floor * prior.sigma_floor);
    fit.posterior.modes.push_back(mode);
    fit.posterior.RefreshDerived(prior.sigma_floor);
    fit.converged = true;
    return fit;
  }
  const double center = 0.5 * (lo + hi);
  const double scale = 0.5 * (hi - lo);
  for (int k = 0; k < num_clients; ++k) {
    clients[k]->SetFrame(center, scale);
    if (ledger != nullptr) {
      ledger->Record(Phase::kGmmInit, Direction::kDownload, k, 2);
    }
  }

  const int t_count = prior.max_modes;
  const uint64_t mode_scalars = static_cast<uint64_t>(t_count);
  std::vector<ClientEStats> e_stats(num_clients);
  std::vector<ClientMStats> m_stats(num_clients);
  GmmPosterior best;
  double best_elbo = -std::numeric_limits<double>::infinity();
  for (int init = 0; init < prior.num_inits; ++init) {
    GmmPosterior posterior = InitialPosterior(prior, rows, options.seed, init);
    std::vector<double> trace;
    bool converged = false;
    double last_elbo = -std::numeric_limits<double>::infinity();
    for (int round = 1; round <= prior.max_rounds; ++round) {
      const ModeExpectations expectations = ComputeExpectations(posterior);
      for (int k = 0; k < num_clients; ++k) {
        e_stats[k] = clients[k]->EStep(expectations);
        fit.degenerate_rows += e_stats[k].degenerate_rows;
      }
      const AggregatedE aggregated = AggregateE(e_stats, prior);
      for (int k = 0; k < num_clients; ++k) {
        m_stats[k] = clients[k]->MStep(aggregated, prior);
      }
      const std::vector<double> scatter =
          AggregateM(m_stats, aggregated, prior);
      absl::StatusOr<RoundResult> result =
          FinalizeRound(posterior, aggregated, scatter, prior, round);
      if (!result.ok()) return result.status();
      posterior = std::move(result->posterior);
      trace.push_back(result->elbo.value);
      ++fit.rounds;
      if (ledger != nullptr) {
        for (int k = 0; k < num_clients; ++k) {
          // Uploads: E-step sums (2T + 2) and M-step scatter (T).
          ledger->Record(Phase::kGmmRound, Direction::kUpload, k,
                         e_stats[k].ScalarCount() + m_stats[k].ScalarCount());
          // Downloads: expectations (3T), N_t and xbar_t (2T), S_t (T) and
          // the continue/stop flag.
          ledger->Record(Phase::kGmmRound, Direction::kDownload, k,
                         ModeExpectations::kScalarsPerMode * mode_scalars +
                             3 * mode_scalars + 1);
        }
      }
      if (std::abs(result->elbo.value - last_elbo) < prior.conv_eps) {
        converged = true;
        break;
      }
      last_elbo = result->elbo.value;
    }
    // Strict comparison: ties keep the earlier start.
    if (trace.back() > best_elbo) {
      best_elbo = trace.back();
      best = std::move(posterior);
      fit.elbo_trace = std::move(trace);
      fit.converged = converged;
      fit.chosen_init = init;
    }
  }
  fit.final_elbo = best_elbo;
  fit.posterior =
      PruneModes(ToDataUnits(best, center, scale, prior.sigma_floor),
                 prior.prune_threshold, prior.sigma_floor);
  return fit;
}

absl::StatusOr<GmmFit> FitFederatedGmm(
    std::span<const std::span<const double>> shards, const GmmPrior& prior,
    const GmmFitOptions& options) {
  std::vector<GmmClientSession> sessions(shards.begin(), shards.end());
  std::vector<GmmClientSession*> clients;
  clients.reserve(sessions.size());
  for (GmmClientSession& session : sessions) clients.push_back(&session);
  return FitFederatedGmm(std::span<GmmClientSession* const>(clients), prior,
                         options);
}

}  // namespace fedtab
