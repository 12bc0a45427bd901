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

#include "gimdre/gimdre.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include <fmt/format.h>

#include "gimdre/error.hpp"
#include "gimdre/parallel.hpp"

namespace gimdre {
namespace {

std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

void GimdreConfig::validate() const {
  if (!std::isfinite(alpha)) {
    throw Error(ErrorKind::invalid_argument, "alpha must be finite");
  }
  if (outer_iters < 1) {
    throw Error(ErrorKind::invalid_argument, "outer_iters must be at least 1");
  }
  if (schedule_mode == ScheduleMode::explicit_list) {
    if (lambdas.empty()) {
      throw Error(ErrorKind::invalid_argument, "an explicit schedule needs at least one lambda");
    }
  } else if (m < 1) {
    throw Error(ErrorKind::invalid_argument, "m must be at least 1");
  }
  if (!(clip_low > 0.0) || !(clip_high > clip_low) || !std::isfinite(clip_high)) {
    throw Error(ErrorKind::invalid_argument, "clip bounds must be positive and ordered");
  }
  if (!(min_bridge_ess >= 0.0)) {
    throw Error(ErrorKind::invalid_argument, "min_bridge_ess must be nonnegative");
  }
  ::gimdre::validate(GeodesicParams{alpha, 0.5, branch});
}

BridgeSchedule gimdre_schedule(const GimdreConfig& cfg, const GimdreOptions& options) {
  switch (cfg.schedule_mode) {
    case ScheduleMode::explicit_list:
      return {cfg.lambdas, ScheduleMode::explicit_list, cfg.alpha};
    case ScheduleMode::arc_length:
      if (!options.schedule_models) {
        throw Error(ErrorKind::missing_argument, "arc-length schedules need the source and target models");
      }
      return bridge_schedule(cfg.m, cfg.schedule_mode, cfg.alpha, options.schedule_models->first,
                             options.schedule_models->second, options.quad);
    case ScheduleMode::uniform:
    case ScheduleMode::telescoping_sqrt:
      break;
  }
  return bridge_schedule(cfg.m, cfg.schedule_mode, cfg.alpha);
}

Vector bridge_weights(const Vector& r_hat, double alpha, double lambda, Proxy proxy, GeodesicBranch branch) {
  Vector w(r_hat.size());
  const GeodesicParams params{alpha, lambda, branch};
  for (Eigen::Index i = 0; i < r_hat.size(); ++i) {
    w(i) = importance_weight(r_hat(i), params, proxy);
  }
  return w;
}

GimdreResult gimdre_fit(const Samples& xs, const Samples& xt, const GimdreConfig& cfg, const GimdreOptions& options) {
  cfg.validate();
  if (xs.rows() < 2 || xt.rows() < 2) {
    throw Error(ErrorKind::empty_input, "GIMDRE needs at least two samples per class");
  }
  if (xs.cols() != xt.cols()) {
    throw Error(ErrorKind::dimension_mismatch, "source and target samples differ in dimension");
  }
  const BridgeSchedule schedule = gimdre_schedule(cfg, options);
  const std::vector<double> lambdas = schedule.with_endpoints();
  const std::size_t n_stages = lambdas.size() - 1;
  const Samples& proxy = cfg.proxy == Proxy::source ? xs : xt;
  const Eigen::Index n = proxy.rows();

  RatioFn current;
  if (options.warm_start) {
    current = *options.warm_start;
  } else {
    const LogisticModel direct = fit_direct(xs, xt, cfg.base);
    current = [direct](const PointRef& x) { return ratio_from_classifier(direct, x); };
  }

  GimdreTrace trace;
  if (options.oracle) {
    trace.initial_mae = mae(current, options.oracle->truth, options.oracle->eval_points);
  }
  Vector prev_log(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    prev_log(i) = std::log(current(row(proxy, i)));
  }

  std::optional<ChainedRatioEstimator> chain;
  for (std::size_t it = 1; it <= cfg.outer_iters; ++it) {
    GimdreIteration record;
    record.iteration = it;

    Vector r(n);
    std::size_t clipped = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double raw = std::exp(prev_log(i));
      r(i) = std::clamp(raw, cfg.clip_low, cfg.clip_high);
      clipped += (r(i) != raw) ? 1 : 0;
    }
    record.clip_fraction = static_cast<double>(clipped) / static_cast<double>(n);

    std::vector<Vector> weights;
    weights.reserve(lambdas.size());
    for (const double lambda : lambdas) {
      Vector w = bridge_weights(r, cfg.alpha, lambda, cfg.proxy, cfg.branch);
      const EssReport rep = ess(as_span(w));
      record.bridges.push_back({lambda, rep.ess, w.minCoeff(), w.maxCoeff(), w.mean()});
      if (rep.ess < cfg.min_bridge_ess) {
        throw Error(ErrorKind::collapsed_bridge,
                    fmt::format("bridge weights collapsed at lambda = {} (ESS {:.3g}, iteration {})", lambda, rep.ess,
                                it));
      }
      weights.push_back(std::move(w));
    }

    std::vector<std::optional<LogisticModel>> fitted(n_stages);
    parallel_for(n_stages, options.jobs, [&](std::size_t k) {
      DreBaseConfig base = cfg.base;
      base.seed = derive_seed(cfg.seed, {it, k});
      fitted[k] = fit_weighted_logistic(proxy, proxy, weights[k], weights[k + 1], base);
    });
    std::vector<ChainStage> stages;
    stages.reserve(n_stages);
    for (auto& f : fitted) {
      record.nonconverged_stages += f->converged() ? 0 : 1;
      stages.emplace_back(std::move(*f));
    }
    chain.emplace(std::move(stages), schedule);

    double delta = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double l = chain->log_ratio(row(proxy, i));
      delta += std::abs(l - prev_log(i));
      prev_log(i) = l;
    }
    record.delta = delta / static_cast<double>(n);
    if (options.oracle) {
      record.mae = mae(chain->as_function(), options.oracle->truth, options.oracle->eval_points);
    }
    trace.iterations.push_back(std::move(record));
  }
  return {std::move(*chain), std::move(trace)};
}

}  // namespace gimdre
