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

#ifndef GIMDRE_SCHEDULE_HPP
#define GIMDRE_SCHEDULE_HPP

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "gimdre/distributions.hpp"
#include "gimdre/quadrature.hpp"

namespace gimdre {

enum class ScheduleMode {
  uniform,           ///< lambda_k = k / (m + 1)
  arc_length,        ///< equal Fisher length between consecutive bridges
  telescoping_sqrt,  ///< lambda_k = sqrt(1 - a_k^2), a_k uniform, sorted
  explicit_list,     ///< caller-provided lambdas
};

[[nodiscard]] std::string_view to_string(ScheduleMode mode) noexcept;
[[nodiscard]] std::optional<ScheduleMode> parse_schedule_mode(std::string_view name) noexcept;

/// Interior bridge points lambda_1 <= ... <= lambda_m in (0, 1). The chain
/// endpoints lambda_0 = 0 and lambda_{m+1} = 1 are implicit.
class BridgeSchedule {
 public:
  BridgeSchedule() = default;
  /// Throws invalid-argument unless lambdas are non-decreasing and strictly
  /// inside (0, 1).
  BridgeSchedule(std::vector<double> lambdas, ScheduleMode mode, double alpha);

  [[nodiscard]] const std::vector<double>& lambdas() const noexcept { return lambdas_; }
  [[nodiscard]] ScheduleMode mode() const noexcept { return mode_; }
  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] std::size_t m() const noexcept { return lambdas_.size(); }

  /// 0, lambda_1, ..., lambda_m, 1
  [[nodiscard]] std::vector<double> with_endpoints() const;

 private:
  std::vector<double> lambdas_;
  ScheduleMode mode_ = ScheduleMode::uniform;
  double alpha_ = -1.0;
};

/// Nodes of a lambda grid on [0, 1], including both endpoints.
struct LambdaGrid {
  std::vector<double> nodes;

  static LambdaGrid uniform(std::size_t intervals);
  /// lambda = u^2 on a uniform u grid.
  static LambdaGrid quadratic(std::size_t intervals);
  /// (1 - cos(pi u)) / 2, dense near both endpoints.
  static LambdaGrid clustered(std::size_t intervals);
};

/// Cumulative Fisher length along lambda -> gamma(lambda), one entry per
/// grid node (the first is 0). Each segment contributes
/// sqrt(2 SymKL) = sqrt(KL(a||b) + KL(b||a)) between the normalized bridges.
[[nodiscard]] std::vector<double> cumulative_arc_length(const DensityModel& p, const DensityModel& q, double alpha,
                                                        const LambdaGrid& grid, const QuadratureSpec& quad = {});

[[nodiscard]] double arc_length(const DensityModel& p, const DensityModel& q, double alpha, const LambdaGrid& grid,
                                const QuadratureSpec& quad = {});

/// Resolution of the cumulative-length table used by arc-length schedules.
inline constexpr std::size_t kArcLengthTableIntervals = 4096;

/// Uniform and sqrt presets need no densities.
[[nodiscard]] BridgeSchedule bridge_schedule(std::size_t m, ScheduleMode mode, double alpha);

/// Arc-length mode splits the curve into m + 1 pieces of equal length by
/// inverting the cumulative table with monotone interpolation.
[[nodiscard]] BridgeSchedule bridge_schedule(std::size_t m, ScheduleMode mode, double alpha, const DensityModel& p,
                                             const DensityModel& q, const QuadratureSpec& quad = {});

}  // namespace gimdre

#endif  // GIMDRE_SCHEDULE_HPP
