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

#include "gimdre/imdre.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gimdre/error.hpp"

namespace gimdre {
namespace {

const double kLogClipLow = std::log(kRatioClipLow);
const double kLogClipHigh = std::log(kRatioClipHigh);

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<Eigen::Index> shuffled(Eigen::Index n, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(idx[i - 1], idx[pick(rng)]);
  }
  return idx;
}

}  // namespace

double AnalyticBridgeStage::log_ratio(const PointRef& x) const {
  const double lp = log_density(*p, x);
  const double lq = log_density(*q, x);
  return geodesic_log_density(lp, lq, {alpha, lambda_from}) - geodesic_log_density(lp, lq, {alpha, lambda_to});
}

double stage_log_ratio(const ChainStage& stage, const PointRef& x) {
  return std::visit(overloaded{
                        [&](const LogisticModel& m) { return std::clamp(m.log_ratio(x), kLogClipLow, kLogClipHigh); },
                        [&](const AnalyticBridgeStage& s) { return s.log_ratio(x); },
                    },
                    stage);
}

ChainedRatioEstimator::ChainedRatioEstimator(std::vector<ChainStage> stages, BridgeSchedule schedule)
    : stages_(std::move(stages)), schedule_(std::move(schedule)) {
  if (stages_.size() != schedule_.m() + 1) {
    throw Error(ErrorKind::invalid_argument, "a chain over m bridges needs m + 1 stages, got " +
                                                 std::to_string(stages_.size()) + " for m = " +
                                                 std::to_string(schedule_.m()));
  }
}

double ChainedRatioEstimator::log_ratio(const PointRef& x) const {
  double s = 0.0;
  for (const auto& stage : stages_) {
    s += stage_log_ratio(stage, x);
  }
  return s;
}

double ChainedRatioEstimator::operator()(const PointRef& x) const {
  return std::clamp(std::exp(log_ratio(x)), kRatioClipLow, kRatioClipHigh);
}

RatioFn ChainedRatioEstimator::as_function() const {
  return [self = *this](const PointRef& x) { return self(x); };
}

double chain_ratio(const ChainedRatioEstimator& est, const PointRef& x) { return est(x); }

std::string_view to_string(BridgeMode mode) noexcept {
  return mode == BridgeMode::mixture_density ? "mixture_density" : "point_interpolation";
}

std::optional<BridgeMode> parse_bridge_mode(std::string_view name) noexcept {
  if (name == "mixture_density") {
    return BridgeMode::mixture_density;
  }
  if (name == "point_interpolation") {
    return BridgeMode::point_interpolation;
  }
  return std::nullopt;
}

Samples bridge_sample(const Samples& xs, const Samples& xt, double lambda, BridgeMode mode, std::size_t size,
                      Rng& rng) {
  if (xs.rows() == 0 || xt.rows() == 0) {
    throw Error(ErrorKind::empty_input, "bridge sampling needs both samples");
  }
  if (xs.cols() != xt.cols()) {
    throw Error(ErrorKind::dimension_mismatch, "source and target samples differ in dimension");
  }
  if (lambda == 0.0) {
    return xs;
  }
  if (lambda == 1.0) {
    return xt;
  }
  const auto n = static_cast<Eigen::Index>(size);
  Samples out(n, xs.cols());
  if (mode == BridgeMode::mixture_density) {
    std::bernoulli_distribution from_target(lambda);
    std::uniform_int_distribution<Eigen::Index> pick_s(0, xs.rows() - 1);
    std::uniform_int_distribution<Eigen::Index> pick_t(0, xt.rows() - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      out.row(i) = from_target(rng) ? xt.row(pick_t(rng)) : xs.row(pick_s(rng));
    }
    return out;
  }
  if (n > xs.rows() || n > xt.rows()) {
    throw Error(ErrorKind::invalid_argument, "point interpolation cannot pair more rows than either sample has");
  }
  const auto is = shuffled(xs.rows(), rng);
  const auto it = shuffled(xt.rows(), rng);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out.row(i) = (1.0 - lambda) * xs.row(is[k]) + lambda * xt.row(it[k]);
  }
  return out;
}

ChainedRatioEstimator telescope_fit(const Samples& xs, const Samples& xt, const BridgeSchedule& schedule,
                                    BridgeMode mode, const DreBaseConfig& base, std::uint64_t seed) {
  if (xs.rows() < 2 || xt.rows() < 2) {
    throw Error(ErrorKind::empty_input, "incremental fitting needs at least two samples per class");
  }
  if (schedule.alpha() != -1.0) {
    throw Error(ErrorKind::wrong_geodesic, "mixture bridges live on the alpha = -1 geodesic, schedule has alpha = " +
                                               std::to_string(schedule.alpha()));
  }
  const auto size = static_cast<std::size_t>(std::min(xs.rows(), xt.rows()));
  const auto lambdas = schedule.with_endpoints();
  std::vector<ChainStage> stages;
  stages.reserve(lambdas.size() - 1);
  for (std::size_t k = 0; k + 1 < lambdas.size(); ++k) {
    Rng rng_a(derive_seed(seed, {k, 0}));
    Rng rng_b(derive_seed(seed, {k, 1}));
    const Samples a = bridge_sample(xs, xt, lambdas[k], mode, size, rng_a);
    const Samples b = bridge_sample(xs, xt, lambdas[k + 1], mode, size, rng_b);
    stages.emplace_back(fit_direct(a, b, base));
  }
  return {std::move(stages), schedule};
}

ChainedRatioEstimator analytic_chain(const DensityModel& p, const DensityModel& q, const BridgeSchedule& schedule) {
  const auto sp = std::make_shared<const DensityModel>(p);
  const auto sq = std::make_shared<const DensityModel>(q);
  const auto lambdas = schedule.with_endpoints();
  std::vector<ChainStage> stages;
  for (std::size_t k = 0; k + 1 < lambdas.size(); ++k) {
    stages.emplace_back(AnalyticBridgeStage{sp, sq, schedule.alpha(), lambdas[k], lambdas[k + 1]});
  }
  return {std::move(stages), schedule};
}

}  // namespace gimdre
