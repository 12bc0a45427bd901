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

#ifndef GIMDRE_GEODESICS_HPP
#define GIMDRE_GEODESICS_HPP

// Pointwise alpha-geodesics between two positive values:
//
//   gamma = {(1 - lambda) p^b + lambda q^b}^(1/b),   b = (1 - alpha) / 2,
//
// with the exponential interpolation p^(1-lambda) q^lambda at alpha = 1.
// alpha = -1 is the arithmetic mean, alpha = 3 the harmonic mean.

namespace gimdre {

enum class GeodesicBranch {
  automatic,    ///< exponential iff |alpha - 1| < kAlphaOneTolerance
  power,        ///< power-mean formula; alpha = 1 exactly is rejected
  exponential,  ///< requires alpha within kAlphaOneTolerance of 1
};

inline constexpr double kAlphaOneTolerance = 1e-8;
inline constexpr double kWeightClipLow = 1e-12;
inline constexpr double kWeightClipHigh = 1e12;

struct GeodesicParams {
  double alpha = -1.0;
  double lambda = 0.0;
  GeodesicBranch branch = GeodesicBranch::automatic;
};

/// Which density the importance weights are taken with respect to.
enum class Proxy { source, target };

/// Throws invalid-argument / singular-alpha for unusable parameters.
void validate(const GeodesicParams& params);

/// True when `params` resolves to the exponential branch.
[[nodiscard]] bool uses_exponential_branch(const GeodesicParams& params);

/// log gamma from log p and log q. Always evaluated in log space.
[[nodiscard]] double geodesic_log_density(double log_p, double log_q, const GeodesicParams& params);

/// Unnormalized bridge density value. Requires p, q > 0.
[[nodiscard]] double geodesic_density(double p, double q, const GeodesicParams& params);

/// Unclipped log of w_lambda = gamma(1, 1/r) for the source proxy.
[[nodiscard]] double log_importance_weight(double r, const GeodesicParams& params);

/// w_lambda = gamma_lambda / p_s expressed through r = p_s / p_t, clipped to
/// [kWeightClipLow, kWeightClipHigh].
[[nodiscard]] double importance_weight(double r, const GeodesicParams& params);

/// Weight relative to either proxy. The target proxy mirrors the source one
/// with r -> 1/r and lambda -> 1 - lambda.
[[nodiscard]] double importance_weight(double r, const GeodesicParams& params, Proxy proxy);

/// w_{lambda_i} / w_{lambda_j}: the unnormalized bridge density ratio
/// between two points of the same geodesic.
[[nodiscard]] double weight_ratio(double r, double alpha, double lambda_i, double lambda_j);

}  // namespace gimdre

#endif  // GIMDRE_GEODESICS_HPP
