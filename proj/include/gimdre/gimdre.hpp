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

#ifndef GIMDRE_GIMDRE_HPP
#define GIMDRE_GIMDRE_HPP

// Incremental density-ratio estimation along an alpha-geodesic:
//
//  1. fit r0 directly on (Xs, Xt);
//  2. weight the proxy sample for every bridge with w_lambda(r_hat);
//  3. per consecutive bridge pair, fit a logistic stage separating the proxy
//     weighted by w_{lambda_{k-1}} from the proxy weighted by w_{lambda_k};
//     the product of stages is the new r_hat;
//  4. repeat 2-3 for a fixed number of outer iterations.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gimdre/diagnostics.hpp"
#include "gimdre/distributions.hpp"
#include "gimdre/dre_base.hpp"
#include "gimdre/geodesics.hpp"
#include "gimdre/imdre.hpp"
#include "gimdre/schedule.hpp"

namespace gimdre {

/// Default floor on bridge ESS; below it a fit is a collapsed-bridge error.
inline constexpr double kMinBridgeEss = 2.0;

struct GimdreConfig {
  double alpha = 3.0;
  std::size_t m = 100;
  std::size_t outer_iters = 3;
  Proxy proxy = Proxy::source;
  ScheduleMode schedule_mode = ScheduleMode::uniform;
  /// Used when schedule_mode is explicit_list.
  std::vector<double> lambdas;
  GeodesicBranch branch = GeodesicBranch::automatic;
  DreBaseConfig base;
  /// r_hat is clipped to [clip_low, clip_high] before weights are computed.
  double clip_low = 1e-6;
  double clip_high = 1e6;
  /// 0 disables the collapsed-bridge check.
  double min_bridge_ess = kMinBridgeEss;
  std::uint64_t seed = 0;

  /// Throws invalid-argument on violated invariants.
  void validate() const;
};

/// Ground truth for trace diagnostics.
struct GimdreOracle {
  RatioFn truth;
  Samples eval_points;
};

struct GimdreOptions {
  /// Replaces step 1 when set.
  std::optional<RatioFn> warm_start;
  std::optional<GimdreOracle> oracle;
  /// Required by arc-length schedules.
  std::optional<std::pair<DensityModel, DensityModel>> schedule_models;
  QuadratureSpec quad;
  /// Worker threads for the independent stage fits of one iteration.
  std::size_t jobs = 1;
};

struct WeightSummary {
  double lambda = 0.0;
  double ess = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

struct GimdreIteration {
  std::size_t iteration = 0;  ///< 1-based
  std::optional<double> mae;
  std::vector<WeightSummary> bridges;  ///< lambda_0 .. lambda_{m+1}
  double clip_fraction = 0.0;          ///< share of proxy points whose r_hat was clipped
  double delta = 0.0;                  ///< mean |log r_new - log r_prev| on the proxy
  std::size_t nonconverged_stages = 0;
};

struct GimdreTrace {
  std::optional<double> initial_mae;  ///< of the warm start
  std::vector<GimdreIteration> iterations;
};

struct GimdreResult {
  ChainedRatioEstimator estimator;
  GimdreTrace trace;
};

/// Builds the schedule described by `cfg`.
[[nodiscard]] BridgeSchedule gimdre_schedule(const GimdreConfig& cfg, const GimdreOptions& options = {});

/// Bridge weights of the proxy sample on the geodesic, given r_hat values
/// (already clipped) at the proxy points.
[[nodiscard]] Vector bridge_weights(const Vector& r_hat, double alpha, double lambda, Proxy proxy,
                                    GeodesicBranch branch = GeodesicBranch::automatic);


[[nodiscard]] GimdreResult gimdre_fit(const Samples& xs, const Samples& xt, const GimdreConfig& cfg,
                                      const GimdreOptions& options = {});

}  // namespace gimdre

#endif  // GIMDRE_GIMDRE_HPP
