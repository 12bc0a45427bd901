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

#ifndef GIMDRE_DISTRIBUTIONS_HPP
#define GIMDRE_DISTRIBUTIONS_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <variant>

#include <Eigen/Cholesky>

#include "gimdre/geodesics.hpp"
#include "gimdre/quadrature.hpp"
#include "gimdre/types.hpp"

namespace gimdre {

/// Multivariate normal N(mean, cov). The second parameter is always a
/// covariance, so the univariate N(8, 3) has variance 3.
class GaussianModel {
 public:
  GaussianModel(Vector mean, Eigen::MatrixXd cov);

  static GaussianModel univariate(double mean, double variance);
  static GaussianModel isotropic(Vector mean, double variance);

  [[nodiscard]] const Vector& mean() const noexcept { return mean_; }
  [[nodiscard]] const Eigen::MatrixXd& cov() const noexcept { return cov_; }
  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  /// Marginal standard deviation of coordinate i.
  [[nodiscard]] double stddev(std::size_t i = 0) const { return std::sqrt(cov_(i, i)); }

  [[nodiscard]] double log_density(const PointRef& x) const;
  void sample_into(Samples& out, Rng& rng) const;

 private:
  Vector mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;  // lower factor L with cov = L L^T
  double log_norm_ = 0.0;
};

/// Log-normal on (0, inf): log x ~ N(mu, sigma^2).
struct LogNormalModel {
  double mu = 0.0;
  double sigma = 1.0;
};

/// Power-law a x^(a-1) on [0, 1].
struct PowerLawModel {
  double a = 1.0;
};

class DensityModel;

/// Unnormalized alpha-geodesic bridge between two models. Evaluable but not
/// samplable.
struct GeodesicDensity {
  std::shared_ptr<const DensityModel> p;
  std::shared_ptr<const DensityModel> q;
  GeodesicParams params;
};

class DensityModel {
 public:
  using Variant = std::variant<GaussianModel, LogNormalModel, PowerLawModel, GeodesicDensity>;

  DensityModel(GaussianModel m) : model_(std::move(m)) {}  // NOLINT(google-explicit-constructor)
  DensityModel(LogNormalModel m);                          // NOLINT(google-explicit-constructor)
  DensityModel(PowerLawModel m);                           // NOLINT(google-explicit-constructor)
  DensityModel(GeodesicDensity m);                         // NOLINT(google-explicit-constructor)

  [[nodiscard]] const Variant& variant() const noexcept { return model_; }
  [[nodiscard]] std::size_t dim() const;

  template <class T>
  [[nodiscard]] const T* get_if() const noexcept {
    return std::get_if<T>(&model_);
  }

 private:
  Variant model_;
};

/// Builds the geodesic wrapper between p and q.
[[nodiscard]] DensityModel geodesic_model(DensityModel p, DensityModel q, GeodesicParams params);

/// -inf outside the support.
[[nodiscard]] double log_density(const DensityModel& model, const PointRef& x);
/// Zero outside the support; NaN coordinates signal invalid-argument.
[[nodiscard]] double density(const DensityModel& model, const PointRef& x);
[[nodiscard]] double log_density(const DensityModel& model, double x);
[[nodiscard]] double density(const DensityModel& model, double x);

[[nodiscard]] Samples sample(const DensityModel& model, std::size_t n, Rng& rng);
[[nodiscard]] Samples sample(const DensityModel& model, std::size_t n, std::uint64_t seed);

/// r(x) = p(x) / q(x) evaluated in log space; may overflow to +inf.
[[nodiscard]] RatioFn true_ratio(DensityModel p, DensityModel q);
[[nodiscard]] double log_true_ratio(const DensityModel& p, const DensityModel& q, const PointRef& x);

/// Closed-form KL(p || q) for univariate Gaussians.
[[nodiscard]] double kl_gaussian_analytic(const GaussianModel& p, const GaussianModel& q);

struct DivergenceKind {
  enum class Type { kl, alpha, pearson, hellinger };
  Type type = Type::kl;
  double alpha = 0.0;

  static DivergenceKind kl() { return {Type::kl, 0.0}; }
  static DivergenceKind alpha_divergence(double a) { return {Type::alpha, a}; }
  static DivergenceKind pearson() { return {Type::pearson, 0.0}; }
  static DivergenceKind hellinger() { return {Type::hellinger, 0.0}; }
};

struct DivergenceEstimate {
  double value = 0.0;
  double std_error = 0.0;  ///< zero for quadrature
};

/// D(p || q) by quadrature in one dimension and by Monte Carlo under p
/// otherwise. Conventions:
///   kl         int p log(p/q)
///   alpha(a)   (1 - int p^a q^(1-a)) / (a (1 - a)), so alpha(2) is Pearson
///   pearson    (1/2) int (p - q)^2 / q
///   hellinger  int (sqrt p - sqrt q)^2
[[nodiscard]] DivergenceEstimate divergence_numeric(const DensityModel& p, const DensityModel& q,
                                                    DivergenceKind kind, const QuadratureSpec& quad = {});

/// Unnormalized KL between p and the scaled model r_hat q:
///   int p log(p / (r_hat q)) - 1 + int q r_hat.
/// Quadrature in one dimension, Monte Carlo under p and q otherwise.
[[nodiscard]] DivergenceEstimate unnormalized_kl(const DensityModel& p, const DensityModel& q, const RatioFn& r_hat,
                                                 const QuadratureSpec& quad = {});

/// Pearson divergence between p and r_hat q: (1/2) int (p - r_hat q)^2 / p.
[[nodiscard]] DivergenceEstimate pearson_to_scaled(const DensityModel& p, const DensityModel& q, const RatioFn& r_hat,
                                                   const QuadratureSpec& quad = {});

/// Rule covering the supports of two univariate models. Gaussians use a
/// window of `half_width` standard deviations, log-normals are integrated in
/// log x, and power laws through x = u^k so that x^(a-1) becomes smooth.
[[nodiscard]] QuadratureRule quadrature_rule(const DensityModel& p, const DensityModel& q,
                                             const QuadratureSpec& quad = {});

}  // namespace gimdre

#endif  // GIMDRE_DISTRIBUTIONS_HPP
