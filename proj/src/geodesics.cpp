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

#include "gimdre/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gimdre/error.hpp"

namespace gimdre {
namespace {

double logaddexp(double a, double b) {
  if (a == -INFINITY) {
    return b;
  }
  if (b == -INFINITY) {
    return a;
  }
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Power branch in log space: (1/b) log((1-l) e^{b lp} + l e^{b lq}).
double power_log_mean(double log_p, double log_q, double lambda, double b) {
  const double u = std::log1p(-lambda) + b * log_p;
  const double v = std::log(lambda) + b * log_q;
  return logaddexp(u, v) / b;
}

double clip_weight(double log_w) {
  return std::clamp(std::exp(log_w), kWeightClipLow, kWeightClipHigh);
}

void check_ratio(double r) {
  if (std::isnan(r)) {
    throw Error(ErrorKind::invalid_argument, "ratio value is NaN");
  }
  if (!(r > 0.0)) {
    throw Error(ErrorKind::invalid_ratio, "ratio value must be positive, got " + std::to_string(r));
  }
}

}  // namespace

void validate(const GeodesicParams& params) {
  if (!std::isfinite(params.alpha)) {
    throw Error(ErrorKind::invalid_argument, "alpha must be finite");
  }
  if (!(params.lambda >= 0.0 && params.lambda <= 1.0)) {
    throw Error(ErrorKind::invalid_argument,
                "lambda must lie in [0,1], got " + std::to_string(params.lambda));
  }
  const bool near_one = std::abs(params.alpha - 1.0) < kAlphaOneTolerance;
  if (params.branch == GeodesicBranch::power && params.alpha == 1.0) {
    throw Error(ErrorKind::singular_alpha,
                "alpha = 1 is singular for the power branch; use the exponential branch");
  }
  if (params.branch == GeodesicBranch::exponential && !near_one) {
    throw Error(ErrorKind::invalid_argument, "the exponential branch requires alpha = 1");
  }
}

bool uses_exponential_branch(const GeodesicParams& params) {
  switch (params.branch) {
    case GeodesicBranch::exponential: return true;
    case GeodesicBranch::power: return false;
    case GeodesicBranch::automatic: break;
  }
  return std::abs(params.alpha - 1.0) < kAlphaOneTolerance;
}

double geodesic_log_density(double log_p, double log_q, const GeodesicParams& params) {
  validate(params);
  if (std::isnan(log_p) || std::isnan(log_q)) {
    throw Error(ErrorKind::invalid_argument, "log density is NaN");
  }
  const double lambda = params.lambda;
  if (lambda == 0.0) {
    return log_p;
  }
  if (lambda == 1.0) {
    return log_q;
  }
  if (uses_exponential_branch(params)) {
    return (1.0 - lambda) * log_p + lambda * log_q;
  }
  return power_log_mean(log_p, log_q, lambda, 0.5 * (1.0 - params.alpha));
}

double geodesic_density(double p, double q, const GeodesicParams& params) {
  if (std::isnan(p) || std::isnan(q)) {
    throw Error(ErrorKind::invalid_argument, "density value is NaN");
  }
  if (!(p > 0.0) || !(q > 0.0)) {
    throw Error(ErrorKind::invalid_density, "geodesic endpoints must be positive");
  }
  validate(params);
  if (params.lambda == 0.0) {
    return p;
  }
  if (params.lambda == 1.0) {
    return q;
  }
  return std::exp(geodesic_log_density(std::log(p), std::log(q), params));
}

double log_importance_weight(double r, const GeodesicParams& params) {
  check_ratio(r);
  validate(params);
  if (params.lambda == 0.0) {
    return 0.0;
  }
  return geodesic_log_density(0.0, -std::log(r), params);
}

double importance_weight(double r, const GeodesicParams& params) {
  return clip_weight(log_importance_weight(r, params));
}

double importance_weight(double r, const GeodesicParams& params, Proxy proxy) {
  if (proxy == Proxy::source) {
    return importance_weight(r, params);
  }
  check_ratio(r);
  GeodesicParams mirrored = params;
  mirrored.lambda = 1.0 - params.lambda;
  return importance_weight(1.0 / r, mirrored);
}

double weight_ratio(double r, double alpha, double lambda_i, double lambda_j) {
  if (lambda_i == lambda_j) {
    check_ratio(r);
    return 1.0;
  }
  const double li = log_importance_weight(r, {alpha, lambda_i});
  const double lj = log_importance_weight(r, {alpha, lambda_j});
  return std::exp(li - lj);
}

}  // namespace gimdre
