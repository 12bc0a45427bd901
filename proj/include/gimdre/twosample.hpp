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

#ifndef GIMDRE_TWOSAMPLE_HPP
#define GIMDRE_TWOSAMPLE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gimdre/dre_base.hpp"
#include "gimdre/gimdre.hpp"
#include "gimdre/types.hpp"

namespace gimdre {

/// (1/2n_s) sum r(x_s) - (1/n_t) sum r(x_t) + 1/2. Not clipped.
[[nodiscard]] double pearson_divergence_estimate(const RatioFn& r_hat, const Samples& xs, const Samples& xt);

/// How each split is turned into a ratio estimate.
using TwoSampleFit = std::variant<DreBaseConfig, GimdreConfig>;

struct PermutationTestResult {
  double observed = 0.0;
  std::vector<double> null_stats;
  double p_value = 1.0;
  std::size_t K = 0;
  std::uint64_t seed = 0;
};

/// (1 + #{null >= observed}) / (K + 1).
[[nodiscard]] double permutation_p_value(double observed, std::span<const double> null_stats);

/// Fits on the original split, then on K random re-splits of the pooled
/// sample. Shuffle k draws from its own derived seed, so results do not
/// depend on `jobs`.
[[nodiscard]] PermutationTestResult permutation_test(const Samples& xs, const Samples& xt, std::size_t K,
                                                     const TwoSampleFit& fit, std::uint64_t seed,
                                                     std::size_t jobs = 1);

[[nodiscard]] nlohmann::json to_json(const PermutationTestResult& result, const std::string& config_hash);

}  // namespace gimdre

#endif  // GIMDRE_TWOSAMPLE_HPP
