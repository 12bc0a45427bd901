// Copyright 2026 The gimdre Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gimdre/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gimdre/error.hpp"

namespace gimdre {
namespace {

double checked_total(std::span<const double> w) {
  double total = 0.0;
  for (const double v : w) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorKind::invalid_argument, "weights must be finite and nonnegative");
    }
    total += v;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorKind::degenerate_weights, "weights sum to zero");
  }
  return total;
}

void check_lengths(std::span<const double> g, std::span<const double> w) {
  if (g.size() != w.size()) {
    throw Error(ErrorKind::dimension_mismatch, "values and weights differ in length");
  }
}

}  // namespace

EssReport ess(std::span<const double> weights) {
  const double total = checked_total(weights);
  // Rescale by the maximum so squares cannot overflow.
  const double top = *std::max_element(weights.begin(), weights.end());
  double s1 = 0.0;
  double s2 = 0.0;
  for (const double v : weights) {
    const double u = v / top;
    s1 += u;
    s2 += u * u;
  }
  const double t = static_cast<double>(weights.size());
  const double mean = s1 / t;
  double var = 0.0;
  for (const double v : weights) {
    const double d = v / top - mean;
    var += d * d;
  }
  var /= t;

  EssReport report;
  report.T = weights.size();
  report.ess = s1 * s1 / s2;
  report.cov_sq = var / (mean * mean);
  const double alt = t / (1.0 + report.cov_sq);
  if (std::abs(alt - report.ess) > 1e-9 * report.ess) {
    throw Error(ErrorKind::numeric_failure, "ESS forms disagree (" + std::to_string(report.ess) + " vs " +
                                                std::to_string(alt) + "), total weight " + std::to_string(total));
  }
  report.ess = std::min(report.ess, t);
  return report;
}

double snis_expectation(std::span<const double> g, std::span<const double> weights) {
  check_lengths(g, weights);
  const double total = checked_total(weights);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    s += (weights[i] / total) * g[i];
  }
  // Keep the convex-combination bound exact under rounding.
  const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  return std::clamp(s, *lo, *hi);
}

double snis_variance_estimate(std::span<const double> g, std::span<const double> weights) {
  const double mean = snis_expectation(g, weights);
  const double total = checked_total(weights);
  double v = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double wn = weights[i] / total;
    const double d = g[i] - mean;
    v += wn * wn * d * d;
  }
  return v;
}

double mae(const RatioFn& estimator, const RatioFn& truth, const Samples& points) {
  if (points.rows() == 0) {
    throw Error(ErrorKind::empty_input, "MAE needs at least one evaluation point");
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const auto x = row(points, i);
    s += std::abs(estimator(x) - truth(x));
  }
  return s / static_cast<double>(points.rows());
}

EssMatrix ess_sweep(const DensityModel& p, const DensityModel& q, const RatioFn& r_hat, std::span<const double> alphas,
                    std::span<const double> lambdas, std::size_t n, std::uint64_t seed, Proxy proxy) {
  if (n < 2) {
    throw Error(ErrorKind::invalid_argument, "ESS sweeps need at least two draws");
  }
  const Samples x = sample(proxy == Proxy::source ? p : q, n, seed);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Weights saturate long before these bounds; they only keep r positive.
    r[i] = std::clamp(r_hat(row(x, static_cast<Eigen::Index>(i))), 1e-300, 1e300);
  }
  EssMatrix out;
  out.alphas.assign(alphas.begin(), alphas.end());
  out.lambdas.assign(lambdas.begin(), lambdas.end());
  out.T = n;
  out.ess.resize(static_cast<Eigen::Index>(alphas.size()), static_cast<Eigen::Index>(lambdas.size()));
  std::vector<double> w(n);
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      const GeodesicParams params{alphas[a], lambdas[l]};
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = importance_weight(r[i], params, proxy);
      }
      out.ess(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(l)) = ess(w).ess;
    }
  }
  return out;
}

}  // namespace gimdre
