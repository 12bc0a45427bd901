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

#ifndef GIMDRE_IMDRE_HPP
#define GIMDRE_IMDRE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "gimdre/distributions.hpp"
#include "gimdre/dre_base.hpp"
#include "gimdre/schedule.hpp"

namespace gimdre {

/// Exact ratio gamma(lambda_from) / gamma(lambda_to) between two bridges of
/// the alpha-geodesic joining p and q.
struct AnalyticBridgeStage {
  std::shared_ptr<const DensityModel> p;
  std::shared_ptr<const DensityModel> q;
  double alpha = -1.0;
  double lambda_from = 0.0;
  double lambda_to = 1.0;

  [[nodiscard]] double log_ratio(const PointRef& x) const;
};

using ChainStage = std::variant<LogisticModel, AnalyticBridgeStage>;

[[nodiscard]] double stage_log_ratio(const ChainStage& stage, const PointRef& x);

/// r(x) ~ prod_k r_k(x), stage k estimating p_{lambda_{k-1}} / p_{lambda_k}.
class ChainedRatioEstimator {
 public:
  /// Throws invalid-argument unless stages.size() == schedule.m() + 1.
  ChainedRatioEstimator(std::vector<ChainStage> stages, BridgeSchedule schedule);

  [[nodiscard]] const std::vector<ChainStage>& stages() const noexcept { return stages_; }
  [[nodiscard]] const BridgeSchedule& schedule() const noexcept { return schedule_; }

  /// Sum of stage log ratios; logistic stages contribute their clipped
  /// ratio. Unclipped overall.
  [[nodiscard]] double log_ratio(const PointRef& x) const;
  /// Clipped to [1e-12, 1e12].
  [[nodiscard]] double operator()(const PointRef& x) const;

  [[nodiscard]] RatioFn as_function() const;

 private:
  std::vector<ChainStage> stages_;
  BridgeSchedule schedule_;
};

[[nodiscard]] double chain_ratio(const ChainedRatioEstimator& est, const PointRef& x);

enum class BridgeMode {
  mixture_density,      ///< Bernoulli(lambda) choice between resampled source and target rows
  point_interpolation,  ///< (1 - lambda) x_s + lambda x_t on shuffled pairs
};

[[nodiscard]] std::string_view to_string(BridgeMode mode) noexcept;
[[nodiscard]] std::optional<BridgeMode> parse_bridge_mode(std::string_view name) noexcept;

/// Draws a bridge sample of `size` rows at lambda. lambda = 0 and 1 return
/// the original source and target samples unchanged.
[[nodiscard]] Samples bridge_sample(const Samples& xs, const Samples& xt, double lambda, BridgeMode mode,
                                    std::size_t size, Rng& rng);

/// Fits one logistic stage per consecutive bridge pair of an alpha = -1
/// schedule. Bridge samples have min(n_s, n_t) rows and are drawn with
/// stage-derived seeds.
[[nodiscard]] ChainedRatioEstimator telescope_fit(const Samples& xs, const Samples& xt,
                                                  const BridgeSchedule& schedule, BridgeMode mode,
                                                  const DreBaseConfig& base, std::uint64_t seed);

/// Chain of analytic stages along the alpha-geodesic of the schedule; its
/// product telescopes to p / q.
[[nodiscard]] ChainedRatioEstimator analytic_chain(const DensityModel& p, const DensityModel& q,
                                                   const BridgeSchedule& schedule);

}  // namespace gimdre

#endif  // GIMDRE_IMDRE_HPP
