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

#ifndef GIMDRE_DIAGNOSTICS_HPP
#define GIMDRE_DIAGNOSTICS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gimdre/distributions.hpp"
#include "gimdre/geodesics.hpp"
#include "gimdre/types.hpp"

namespace gimdre {

struct EssReport {
  double ess = 0.0;     ///< (sum w)^2 / sum w^2
  double cov_sq = 0.0;  ///< squared coefficient of variation V^2
  std::size_t T = 0;
};

/// Throws invalid-argument for negative or non-finite weights and
/// degenerate-weights when they sum to zero. The two ESS forms are
/// cross-checked and a disagreement beyond 1e-9 relative is a
/// numeric-failure.
[[nodiscard]] EssReport ess(std::span<const double> weights);

/// sum_i wn_i g_i with wn the normalized weights.
[[nodiscard]] double snis_expectation(std::span<const double> g, std::span<const double> weights);

/// Plug-in variance sum_i wn_i^2 (g_i - I)^2 of the self-normalized estimate.
[[nodiscard]] double snis_variance_estimate(std::span<const double> g, std::span<const double> weights);

/// Mean of |estimator(x) - truth(x)| over the rows of `points`.
[[nodiscard]] double mae(const RatioFn& estimator, const RatioFn& truth, const Samples& points);

struct EssMatrix {
  std::vector<double> alphas;
  std::vector<double> lambdas;
  Eigen::MatrixXd ess;  ///< alphas x lambdas
  std::size_t T = 0;
};

/// ESS of importance_weight(r_hat(x_i)) over n draws from the proxy, for
/// every (alpha, lambda). All cells share the same draws.
[[nodiscard]] EssMatrix ess_sweep(const DensityModel& p, const DensityModel& q, const RatioFn& r_hat,
                                  std::span<const double> alphas, std::span<const double> lambdas, std::size_t n,
                                  std::uint64_t seed, Proxy proxy = Proxy::source);

}  // namespace gimdre

#endif  // GIMDRE_DIAGNOSTICS_HPP
