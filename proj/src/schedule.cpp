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

#include "gimdre/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gimdre/error.hpp"

namespace gimdre {

std::string_view to_string(ScheduleMode mode) noexcept {
  switch (mode) {
    case ScheduleMode::uniform: return "uniform";
    case ScheduleMode::arc_length: return "arc_length";
    case ScheduleMode::telescoping_sqrt: return "telescoping_sqrt";
    case ScheduleMode::explicit_list: return "explicit";
  }
  return "uniform";
}

std::optional<ScheduleMode> parse_schedule_mode(std::string_view name) noexcept {
  for (const auto mode : {ScheduleMode::uniform, ScheduleMode::arc_length, ScheduleMode::telescoping_sqrt,
                          ScheduleMode::explicit_list}) {
    if (to_string(mode) == name) {
      return mode;
    }
  }
  return std::nullopt;
}

BridgeSchedule::BridgeSchedule(std::vector<double> lambdas, ScheduleMode mode, double alpha)
    : lambdas_(std::move(lambdas)), mode_(mode), alpha_(alpha) {
  if (!std::isfinite(alpha_)) {
    throw Error(ErrorKind::invalid_argument, "schedule alpha must be finite");
  }
  for (std::size_t k = 0; k < lambdas_.size(); ++k) {
    const double l = lambdas_[k];
    if (!(l > 0.0 && l < 1.0)) {
      throw Error(ErrorKind::invalid_argument,
                  "bridge lambda[" + std::to_string(k) + "] = " + std::to_string(l) + " is not inside (0,1)");
    }
    if (k > 0 && l < lambdas_[k - 1]) {
      throw Error(ErrorKind::invalid_argument, "bridge lambdas must be non-decreasing");
    }
  }
}

std::vector<double> BridgeSchedule::with_endpoints() const {
  std::vector<double> out;
  out.reserve(lambdas_.size() + 2);
  out.push_back(0.0);
  out.insert(out.end(), lambdas_.begin(), lambdas_.end());
  out.push_back(1.0);
  return out;
}

LambdaGrid LambdaGrid::uniform(std::size_t intervals) {
  LambdaGrid g;
  for (std::size_t j = 0; j <= intervals; ++j) {
    g.nodes.push_back(static_cast<double>(j) / static_cast<double>(intervals));
  }
  return g;
}

LambdaGrid LambdaGrid::quadratic(std::size_t intervals) {
  LambdaGrid g = uniform(intervals);
  for (auto& l : g.nodes) {
    l *= l;
  }
  return g;
}

LambdaGrid LambdaGrid::clustered(std::size_t intervals) {
  LambdaGrid g = uniform(intervals);
  for (auto& l : g.nodes) {
    l = 0.5 * (1.0 - std::cos(std::numbers::pi * l));
  }
  g.nodes.front() = 0.0;
  g.nodes.back() = 1.0;
  return g;
}

namespace {

// Normalized log bridge density on the quadrature nodes.
class BridgeEvaluator {
 public:
  BridgeEvaluator(const DensityModel& p, const DensityModel& q, const QuadratureSpec& quad)
      : rule_(quadrature_rule(p, q, quad)) {
    const std::size_t n = rule_.size();
    log_p_.resize(n);
    log_q_.resize(n);
    log_w_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      log_p_[i] = log_density(p, rule_.nodes[i]);
      log_q_[i] = log_density(q, rule_.nodes[i]);
      log_w_[i] = std::log(rule_.weights[i]);
    }
  }

  void normalized(double alpha, double lambda, std::vector<double>& out) const {
    const std::size_t n = rule_.size();
    out.resize(n);
    const GeodesicParams params{alpha, lambda};
    double hi = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = geodesic_log_density(log_p_[i], log_q_[i], params);
      hi = std::max(hi, out[i] + log_w_[i]);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z += std::exp(out[i] + log_w_[i] - hi);
    }
    const double log_z = hi + std::log(z);
    if (!std::isfinite(log_z)) {
      throw Error(ErrorKind::numeric_failure, "bridge normalizer is not finite at lambda " + std::to_string(lambda));
    }
    for (auto& v : out) {
      v -= log_z;
    }
  }

  // KL(a||b) + KL(b||a) = int (a - b)(log a - log b).
  [[nodiscard]] double jeffreys(const std::vector<double>& a, const std::vector<double>& b) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == -INFINITY && b[i] == -INFINITY) {
        continue;
      }
      const double d = a[i] - b[i];
      sum += rule_.weights[i] * (std::exp(a[i]) - std::exp(b[i])) * d;
    }
    if (!std::isfinite(sum)) {
      throw Error(ErrorKind::numeric_failure, "symmetrized KL between bridges is not finite");
    }
    return std::max(sum, 0.0);
  }

 private:
  QuadratureRule rule_;
  std::vector<double> log_p_;
  std::vector<double> log_q_;
  std::vector<double> log_w_;
};

}  // namespace

std::vector<double> cumulative_arc_length(const DensityModel& p, const DensityModel& q, double alpha,
                                          const LambdaGrid& grid, const QuadratureSpec& quad) {
  if (grid.nodes.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "arc length needs at least two grid nodes");
  }
  if (p.dim() != 1 || q.dim() != 1) {
    throw Error(ErrorKind::dimension_mismatch, "arc length is implemented for univariate models");
  }
  const BridgeEvaluator eval(p, q, quad);
  std::vector<double> cum(grid.nodes.size(), 0.0);
  std::vector<double> prev;
  std::vector<double> cur;
  eval.normalized(alpha, grid.nodes[0], prev);
  for (std::size_t j = 1; j < grid.nodes.size(); ++j) {
    eval.normalized(alpha, grid.nodes[j], cur);
    cum[j] = cum[j - 1] + std::sqrt(eval.jeffreys(prev, cur));
    std::swap(prev, cur);
  }
  return cum;
}

double arc_length(const DensityModel& p, const DensityModel& q, double alpha, const LambdaGrid& grid,
                  const QuadratureSpec& quad) {
  return cumulative_arc_length(p, q, alpha, grid, quad).back();
}

BridgeSchedule bridge_schedule(std::size_t m, ScheduleMode mode, double alpha) {
  if (m == 0) {
    throw Error(ErrorKind::invalid_argument, "bridge count m must be at least 1");
  }
  std::vector<double> lambdas(m);
  const auto denom = static_cast<double>(m + 1);
  switch (mode) {
    case ScheduleMode::uniform:
      for (std::size_t k = 0; k < m; ++k) {
        lambdas[k] = static_cast<double>(k + 1) / denom;
      }
      break;
    case ScheduleMode::telescoping_sqrt:
      for (std::size_t k = 0; k < m; ++k) {
        const double a = static_cast<double>(k + 1) / denom;
        lambdas[k] = std::sqrt(1.0 - a * a);
      }
      std::sort(lambdas.begin(), lambdas.end());
      break;
    case ScheduleMode::arc_length:
      throw Error(ErrorKind::missing_argument, "arc-length schedules need both densities");
    case ScheduleMode::explicit_list:
      throw Error(ErrorKind::missing_argument, "explicit schedules are built from a lambda list");
  }
  return {std::move(lambdas), mode, alpha};
}

BridgeSchedule bridge_schedule(std::size_t m, ScheduleMode mode, double alpha, const DensityModel& p,
                               const DensityModel& q, const QuadratureSpec& quad) {
  if (mode != ScheduleMode::arc_length) {
    return bridge_schedule(m, mode, alpha);
  }
  if (m == 0) {
    throw Error(ErrorKind::invalid_argument, "bridge count m must be at least 1");
  }
  const LambdaGrid grid = LambdaGrid::clustered(kArcLengthTableIntervals);
  const std::vector<double> cum = cumulative_arc_length(p, q, alpha, grid, quad);
  const double total = cum.back();
  if (!(total > 0.0)) {
    // Degenerate curve: every parametrization has zero speed.
    return bridge_schedule(m, ScheduleMode::uniform, alpha);
  }
  std::vector<double> lambdas(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double target = total * static_cast<double>(k + 1) / static_cast<double>(m + 1);
    const auto it = std::lower_bound(cum.begin(), cum.end(), target);
    const auto j = static_cast<std::size_t>(std::distance(cum.begin(), it));
    const std::size_t lo = j == 0 ? 0 : j - 1;
    const double span = cum[j] - cum[lo];
    const double t = span > 0.0 ? (target - cum[lo]) / span : 0.0;
    lambdas[k] = std::clamp(grid.nodes[lo] + t * (grid.nodes[j] - grid.nodes[lo]), 1e-15, 1.0 - 1e-15);
  }
  std::sort(lambdas.begin(), lambdas.end());
  return {std::move(lambdas), ScheduleMode::arc_length, alpha};
}

}  // namespace gimdre
