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

#ifndef GIMDRE_DRE_BASE_HPP
#define GIMDRE_DRE_BASE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>

#include "gimdre/types.hpp"

namespace gimdre {

/// psi_j(x) = x_j; the "centers" are the coordinate axes.
struct LinearKernel {};
/// (u.v + c)^2 with training points as centers.
struct PolynomialKernel {
  double c = 1.0;
};
/// |u - v|^3 with training points as centers.
struct CubicSplineKernel {};

using KernelSpec = std::variant<LinearKernel, PolynomialKernel, CubicSplineKernel>;

[[nodiscard]] double kernel_eval(const KernelSpec& kernel, const PointRef& u, const PointRef& v);
[[nodiscard]] std::string_view kernel_name(const KernelSpec& kernel) noexcept;

struct OptimizerSettings {
  double tolerance = 1e-6;  ///< on the gradient infinity-norm
  std::size_t max_iterations = 500;
  /// Starting point (bias first). Zero when absent.
  std::optional<Vector> initial_theta;
};

enum class WeightNormalization {
  /// Each class's weights are rescaled to sum to its row count; the prior
  /// factor is the row-count ratio.
  per_class,
  /// Weights are used as given; the prior factor is the ratio of weight
  /// totals, which makes a weight of 2 equivalent to a duplicated row.
  none,
};

struct DreBaseConfig {
  KernelSpec kernel = LinearKernel{};
  double reg = 1e-2;
  OptimizerSettings optimizer;
  WeightNormalization normalization = WeightNormalization::per_class;
  std::size_t max_centers = 1000;
  std::uint64_t seed = 0;  ///< center subsampling
};

/// p(y | x) = 1 / (1 + exp(-y psi(x)^T theta)) with y = +1 for the source
/// class. theta = (bias, coefficients).
class LogisticModel {
 public:
  LogisticModel(KernelSpec kernel, Samples centers, Vector theta, double reg, double n_s, double n_t);

  /// Null model of the given input dimension: theta = 0, balanced classes.
  static LogisticModel null_model(std::size_t dim);

  [[nodiscard]] const Vector& theta() const noexcept { return theta_; }
  [[nodiscard]] const KernelSpec& kernel() const noexcept { return kernel_; }
  [[nodiscard]] const Samples& centers() const noexcept { return centers_; }
  [[nodiscard]] double reg() const noexcept { return reg_; }
  [[nodiscard]] double n_s() const noexcept { return n_s_; }
  [[nodiscard]] double n_t() const noexcept { return n_t_; }
  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(centers_.cols()); }

  [[nodiscard]] bool converged() const noexcept { return converged_; }
  [[nodiscard]] std::size_t iterations() const noexcept { return iterations_; }
  [[nodiscard]] double objective() const noexcept { return objective_; }

  /// psi(x)^T theta
  [[nodiscard]] double score(const PointRef& x) const;
  /// log(n_t / n_s) + score, unclipped.
  [[nodiscard]] double log_ratio(const PointRef& x) const;

 private:
  friend LogisticModel fit_weighted_logistic(const Samples&, const Samples&, const Vector&, const Vector&,
                                             const DreBaseConfig&);

  void build_primal();

  KernelSpec kernel_;
  Samples centers_;
  Vector theta_;
  double reg_;
  double n_s_;
  double n_t_;
  // Feature-space weights for kernels with a finite feature map.
  Vector primal_;
  bool converged_ = true;
  std::size_t iterations_ = 0;
  double objective_ = 0.0;
};

/// Minimizes sum_i wt_i log(1 + exp(-y_i psi(x_i)^T theta)) + reg theta^T theta
/// by Newton iterations with step halving. Non-convergence is reported
/// through `converged()`, not thrown.
[[nodiscard]] LogisticModel fit_weighted_logistic(const Samples& xs, const Samples& xt, const Vector& ws,
                                                  const Vector& wt, const DreBaseConfig& cfg);

/// Unit weights.
[[nodiscard]] LogisticModel fit_direct(const Samples& xs, const Samples& xt, const DreBaseConfig& cfg);

/// Penalized objective of `model` on the given data, with the same weight
/// normalization the fit uses.
[[nodiscard]] double logistic_objective(const LogisticModel& model, const Samples& xs, const Samples& xt,
                                        const Vector& ws, const Vector& wt, WeightNormalization normalization);

/// (n_t / n_s) exp(score), clipped to [1e-12, 1e12].
[[nodiscard]] double ratio_from_classifier(const LogisticModel& model, const PointRef& x);

/// y in {+1, -1}.
[[nodiscard]] double predict_posterior(const LogisticModel& model, const PointRef& x, int y);

inline constexpr double kRatioClipLow = 1e-12;
inline constexpr double kRatioClipHigh = 1e12;

}  // namespace gimdre

#endif  // GIMDRE_DRE_BASE_HPP
