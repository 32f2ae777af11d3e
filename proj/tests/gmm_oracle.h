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

// Centralized reference VB-GMM (Bishop, chapter 10, univariate) used to
// check the federated fit. Written directly from the textbook updates on
// pooled data and shares no code with the library beyond the seed stream
// that picks the initial means.

#ifndef FEDTAB_TESTS_GMM_ORACLE_H_
#define FEDTAB_TESTS_GMM_ORACLE_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

#include "fedtab/random.h"
#include "fedtab/vb_gmm.h"

namespace fedtab::testing {

struct OracleMode {
  double alpha, beta, nu, m, w;
};

// Same first start as the federated driver, in the range-standardized
// frame: jittered evenly spaced means, `rows` pseudo-counts split by a flat
// Dirichlet draw, unit expected precision.
inline std::vector<OracleMode> OracleInit(const GmmPrior& prior, double rows,
                                          uint64_t seed) {
  const int t_count = prior.max_modes;
  const double spacing = 2.0 / t_count;
  Rng rng(MixSeed(seed, 0x6a11));
  std::vector<double> means(t_count), share(t_count);
  double total = 0;
  for (int t = 0; t < t_count; ++t) {
    means[t] = -1.0 + spacing * (t + 0.5) + spacing * rng.Uniform(-0.25, 0.25);
    share[t] = std::exp(rng.LogGamma(1.0));
    total += share[t];
  }
  std::vector<OracleMode> modes(t_count);
  for (int t = 0; t < t_count; ++t) {
    const double n = rows * share[t] / total;
    modes[t] = {prior.alpha0 + n, prior.beta0 + n, prior.nu0 + n, means[t],
                1.0 / (prior.nu0 + n)};
  }
  return modes;
}

// Runs exactly `rounds` VB iterations from the first start on the pooled values and returns the
// unpruned posterior in data units.
inline GmmPosterior CentralizedVbGmm(std::span<const double> pooled,
                                     const GmmPrior& prior, uint64_t seed,
                                     int rounds) {
  using boost::math::digamma;
  const double lo = *std::min_element(pooled.begin(), pooled.end());
  const double hi = *std::max_element(pooled.begin(), pooled.end());
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  std::vector<double> z;
  for (double x : pooled) z.push_back((x - c) / h);

  std::vector<OracleMode> q =
      OracleInit(prior, static_cast<double>(pooled.size()), seed);
  const size_t t_count = q.size();
  const size_t n = z.size();
  std::vector<double> r(n * t_count);
  for (int it = 0; it < rounds; ++it) {
    double alpha_hat = 0;
    for (const OracleMode& m : q) alpha_hat += m.alpha;
    // E step, Bishop (10.64)-(10.67) with D = 1.
    for (size_t i = 0; i < n; ++i) {
      double peak = -std::numeric_limits<double>::infinity();
      for (size_t t = 0; t < t_count; ++t) {
        const OracleMode& m = q[t];
        const double e_ln_pi = digamma(m.alpha) - digamma(alpha_hat);
        const double e_ln_lambda =
            digamma(0.5 * m.nu) + std::log(2.0) + std::log(m.w);
        const double quad = 1.0 / m.beta + m.nu * m.w * (z[i] - m.m) * (z[i] - m.m);
        const double v = e_ln_pi + 0.5 * e_ln_lambda -
                         0.5 * std::log(2 * std::numbers::pi) - 0.5 * quad;
        r[i * t_count + t] = v;
        peak = std::max(peak, v);
      }
      double norm = 0;
      for (size_t t = 0; t < t_count; ++t) {
        r[i * t_count + t] = std::exp(r[i * t_count + t] - peak);
        norm += r[i * t_count + t];
      }
      for (size_t t = 0; t < t_count; ++t) r[i * t_count + t] /= norm;
    }
    // M step, Bishop (10.51)-(10.63).
    for (size_t t = 0; t < t_count; ++t) {
      double nk = 0, sx = 0;
      for (size_t i = 0; i < n; ++i) {
        nk += r[i * t_count + t];
        sx += r[i * t_count + t] * z[i];
      }
      const double xbar = nk > 0 ? sx / nk : prior.m0;
      double sk = 0;
      for (size_t i = 0; i < n; ++i) {
        sk += r[i * t_count + t] * (z[i] - xbar) * (z[i] - xbar);
      }
      OracleMode& m = q[t];
      m.alpha = prior.alpha0 + nk;
      m.beta = prior.beta0 + nk;
      m.nu = prior.nu0 + nk;
      m.m = (prior.beta0 * prior.m0 + nk * xbar) / m.beta;
      const double w_inv = 1.0 / prior.w0 + sk +
                           prior.beta0 * nk / (prior.beta0 + nk) *
                               (xbar - prior.m0) * (xbar - prior.m0);
      m.w = 1.0 / w_inv;
    }
  }
  GmmPosterior out;
  double alpha_total = 0;
  for (const OracleMode& m : q) alpha_total += m.alpha;
  for (const OracleMode& m : q) {
    GmmMode mode;
    mode.alpha = m.alpha;
    mode.beta = m.beta;
    mode.nu = m.nu;
    mode.m = c + h * m.m;
    mode.w = m.w / (h * h);
    mode.pi = m.alpha / alpha_total;
    mode.mu = mode.m;
    mode.sigma = std::max(1.0 / std::sqrt(mode.nu * mode.w), prior.sigma_floor);
    out.modes.push_back(mode);
  }
  return out;
}

// Largest relative difference over every posterior field.
inline double MaxPosteriorGap(const GmmPosterior& a, const GmmPosterior& b) {
  if (a.modes.size() != b.modes.size()) {
    return std::numeric_limits<double>::infinity();
  }
  double gap = 0;
  auto rel = [&](double x, double y) {
    gap = std::max(gap, std::abs(x - y) / std::max(1.0, std::abs(y)));
  };
  for (size_t t = 0; t < a.modes.size(); ++t) {
    const GmmMode& x = a.modes[t];
    const GmmMode& y = b.modes[t];
    rel(x.alpha, y.alpha);
    rel(x.beta, y.beta);
    rel(x.nu, y.nu);
    rel(x.m, y.m);
    rel(x.w, y.w);
    rel(x.pi, y.pi);
    rel(x.mu, y.mu);
    rel(x.sigma, y.sigma);
  }
  return gap;
}

}  // namespace fedtab::testing

#endif  // FEDTAB_TESTS_GMM_ORACLE_H_
