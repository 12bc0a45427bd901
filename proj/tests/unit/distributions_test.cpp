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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gimdre/distributions.hpp"
#include "gimdre/quadrature.hpp"
#include "test_util.hpp"

namespace gimdre {
namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

double integrate(const DensityModel& m) {
  const QuadratureRule rule = quadrature_rule(m, m);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    s += rule.weights[i] * density(m, rule.nodes[i]);
  }
  return s;
}

TEST(Density, KnownValues) {
  EXPECT_NEAR(density(GaussianModel::univariate(0, 1), 0.0), kInvSqrt2Pi, 1e-15);
  EXPECT_DOUBLE_EQ(density(PowerLawModel{1.0}, 0.7), 1.0);
  EXPECT_NEAR(density(LogNormalModel{0.0, 1.0}, 1.0), kInvSqrt2Pi, 1e-15);
}

TEST(Density, OutsideSupportIsZero) {
  EXPECT_EQ(density(LogNormalModel{0.0, 1.0}, -1.0), 0.0);
  EXPECT_EQ(density(LogNormalModel{0.0, 1.0}, 0.0), 0.0);
  EXPECT_EQ(density(PowerLawModel{3.0}, 1.5), 0.0);
  EXPECT_EQ(density(PowerLawModel{3.0}, -0.1), 0.0);
  EXPECT_EQ(log_density(PowerLawModel{3.0}, 2.0), -std::numeric_limits<double>::infinity());
}

TEST(Density, NanInputRejected) {
  EXPECT_GIMDRE_ERROR((void)density(GaussianModel::univariate(0, 1), std::nan("")), ErrorKind::invalid_argument);
}

TEST(Density, LogDensityMatchesLogOfDensity) {
  const DensityModel models[] = {GaussianModel::univariate(1, 2), LogNormalModel{0.5, 0.7}, PowerLawModel{2.5}};
  for (const auto& m : models) {
    for (const double x : {0.1, 0.4, 0.9}) {
      EXPECT_NEAR(log_density(m, x), std::log(density(m, x)), 1e-12);
    }
  }
}

TEST(Density, UnivariateIntegratesToOne) {
  const DensityModel models[] = {GaussianModel::univariate(8, 3), GaussianModel::univariate(0, 2),
                                 LogNormalModel{3.0, 0.5}, LogNormalModel{0.0, 2.0},
                                 PowerLawModel{3.0},        PowerLawModel{0.1}};
  for (const auto& m : models) {
    EXPECT_NEAR(integrate(m), 1.0, 1e-6);
  }
}

TEST(Density, BivariateGaussianIntegratesToOne) {
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.6, 0.6, 1.0;
  Vector mean(2);
  mean << 1.0, -1.0;
  const DensityModel g = GaussianModel(mean, cov);
  const QuadratureRule r0 = gauss_legendre(1.0 - 12.0 * std::sqrt(2.0), 1.0 + 12.0 * std::sqrt(2.0), 64);
  const QuadratureRule r1 = gauss_legendre(-13.0, 11.0, 64);
  double s = 0.0;
  Vector x(2);
  for (std::size_t i = 0; i < r0.size(); ++i) {
    for (std::size_t j = 0; j < r1.size(); ++j) {
      x << r0.nodes[i], r1.nodes[j];
      s += r0.weights[i] * r1.weights[j] * density(g, x);
    }
  }
  EXPECT_NEAR(s, 1.0, 1e-6);
}

TEST(GaussianModel, RejectsBadCovariance) {
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.1, 1.0;
  EXPECT_GIMDRE_ERROR(GaussianModel(Vector::Zero(2), asym), ErrorKind::invalid_argument);
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_GIMDRE_ERROR(GaussianModel(Vector::Zero(2), indefinite), ErrorKind::invalid_argument);
  EXPECT_GIMDRE_ERROR(GaussianModel::univariate(0.0, 0.0), ErrorKind::invalid_argument);
  EXPECT_GIMDRE_ERROR(GaussianModel(Vector::Zero(3), Eigen::MatrixXd::Identity(2, 2)),
                      ErrorKind::dimension_mismatch);
}

TEST(Models, RejectBadParameters) {
  EXPECT_GIMDRE_ERROR(DensityModel(LogNormalModel{0.0, 0.0}), ErrorKind::invalid_argument);
  EXPECT_GIMDRE_ERROR(DensityModel(PowerLawModel{-1.0}), ErrorKind::invalid_argument);
}

TEST(Sample, GaussianMean) {
  const Samples x = sample(GaussianModel::univariate(0, 1), 100000, 42);
  EXPECT_NEAR(x.mean(), 0.0, 4.0 / std::sqrt(1e5));
}

TEST(Sample, PowerLawMean) {
  const Samples x = sample(PowerLawModel{3.0}, 100000, 7);
  EXPECT_NEAR(x.mean(), 0.75, 0.02);
  EXPECT_GE(x.minCoeff(), 0.0);
  EXPECT_LE(x.maxCoeff(), 1.0);
}

TEST(Sample, LogNormalInsideSupport) {
  const Samples x = sample(LogNormalModel{0.0, 2.0}, 10000, 3);
  EXPECT_GT(x.minCoeff(), 0.0);
  // Median of a log-normal is exp(mu).
  std::vector<double> v(x.data(), x.data() + x.size());
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  EXPECT_NEAR(std::log(v[v.size() / 2]), 0.0, 0.1);
}

TEST(Sample, Deterministic) {
  const DensityModel g = GaussianModel::isotropic(Vector::Zero(3), 2.0);
  const Samples a = sample(g, 50, 11);
  const Samples b = sample(g, 50, 11);
  ASSERT_EQ(a.rows(), 50);
  ASSERT_EQ(a.cols(), 3);
  EXPECT_EQ(0, std::memcmp(a.data(), b.data(), sizeof(double) * a.size()));
  const Samples c = sample(g, 50, 12);
  EXPECT_NE(0, std::memcmp(a.data(), c.data(), sizeof(double) * a.size()));
}

TEST(Sample, MultivariateCovariance) {
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.8, 0.8, 1.0;
  const Samples x = sample(GaussianModel(Vector::Zero(2), cov), 100000, 5);
  const Eigen::MatrixXd c = (x.transpose() * x) / static_cast<double>(x.rows());
  EXPECT_NEAR(c(0, 0), 2.0, 0.05);
  EXPECT_NEAR(c(0, 1), 0.8, 0.05);
  EXPECT_NEAR(c(1, 1), 1.0, 0.05);
}

TEST(Sample, GeodesicModelNotSamplable) {
  const DensityModel g = geodesic_model(GaussianModel::univariate(0, 1), GaussianModel::univariate(1, 1),
                                        GeodesicParams{3.0, 0.5});
  EXPECT_GIMDRE_ERROR((void)sample(g, 10, 0), ErrorKind::unsupported_model);
}

TEST(GeodesicModel, EvaluatesPointwiseGeodesic) {
  const DensityModel p = GaussianModel::univariate(0, 1);
  const DensityModel q = GaussianModel::univariate(2, 3);
  const GeodesicParams params{3.0, 0.3};
  const DensityModel g = geodesic_model(p, q, params);
  for (const double x : {-1.0, 0.5, 2.0}) {
    EXPECT_NEAR(density(g, x), geodesic_density(density(p, x), density(q, x), params), 1e-15);
  }
}

TEST(TrueRatio, MatchesDensities) {
  const DensityModel p = GaussianModel::univariate(1, 1);
  const DensityModel q = GaussianModel::univariate(0, 1);
  const RatioFn r = true_ratio(p, q);
  Vector x(1);
  for (const double v : {-2.0, 0.0, 3.0}) {
    x << v;
    EXPECT_NEAR(r(x), std::exp(v - 0.5), 1e-12 * std::exp(v - 0.5));
  }
}

TEST(KlAnalytic, Examples) {
  const auto n = [](double m, double v) { return GaussianModel::univariate(m, v); };
  EXPECT_EQ(kl_gaussian_analytic(n(0, 1), n(0, 1)), 0.0);
  EXPECT_NEAR(kl_gaussian_analytic(n(8, 9), n(0, 4)), std::log(2.0 / 3.0) + 73.0 / 8.0 - 0.5, 1e-12);
  EXPECT_NEAR(kl_gaussian_analytic(n(1, 1), n(0, 1)), 0.5, 1e-15);
}

TEST(KlAnalytic, RejectsMultivariate) {
  const GaussianModel g2 = GaussianModel::isotropic(Vector::Zero(2), 1.0);
  EXPECT_GIMDRE_ERROR((void)kl_gaussian_analytic(g2, GaussianModel::univariate(0, 1)),
                      ErrorKind::dimension_mismatch);
}

TEST(KlAnalytic, NonnegativeZeroIffEqual) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mu(-5, 5);
  std::uniform_real_distribution<double> var(0.2, 5);
  for (int i = 0; i < 100; ++i) {
    const double m1 = mu(rng);
    const double v1 = var(rng);
    const double m2 = mu(rng);
    const double v2 = var(rng);
    EXPECT_GT(kl_gaussian_analytic(GaussianModel::univariate(m1, v1), GaussianModel::univariate(m2, v2)), 0.0);
    EXPECT_EQ(kl_gaussian_analytic(GaussianModel::univariate(m1, v1), GaussianModel::univariate(m1, v1)), 0.0);
  }
}

TEST(DivergenceNumeric, KlMatchesAnalytic) {
  const GaussianModel p = GaussianModel::univariate(8, 9);
  const GaussianModel q = GaussianModel::univariate(0, 4);
  EXPECT_NEAR(divergence_numeric(p, q, DivergenceKind::kl()).value, kl_gaussian_analytic(p, q), 1e-6);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> mu(-4, 4);
  std::uniform_real_distribution<double> var(0.3, 4);
  for (int i = 0; i < 20; ++i) {
    const GaussianModel a = GaussianModel::univariate(mu(rng), var(rng));
    const GaussianModel b = GaussianModel::univariate(mu(rng), var(rng));
    EXPECT_NEAR(divergence_numeric(a, b, DivergenceKind::kl()).value, kl_gaussian_analytic(a, b), 1e-6);
  }
}

TEST(DivergenceNumeric, AlphaTwoIsPearson) {
  const GaussianModel p = GaussianModel::univariate(0, 1);
  EXPECT_NEAR(divergence_numeric(p, p, DivergenceKind::alpha_divergence(2.0)).value, 0.0, 1e-12);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mu(-1, 1);
  std::uniform_real_distribution<double> var(0.5, 1.5);
  for (int i = 0; i < 3; ++i) {
    // Pearson needs q heavier-tailed than p/2 to be finite; keep var_q > var_p / 2.
    const double vp = var(rng);
    const GaussianModel a = GaussianModel::univariate(mu(rng), vp);
    const GaussianModel b = GaussianModel::univariate(mu(rng), vp * 1.2);
    const double pe = divergence_numeric(a, b, DivergenceKind::pearson()).value;
    const double d2 = divergence_numeric(a, b, DivergenceKind::alpha_divergence(2.0)).value;
    EXPECT_NEAR(d2, pe, 1e-8);
    EXPECT_GT(pe, 0.0);
  }
}

TEST(DivergenceNumeric, HellingerKnownValue) {
  // Bhattacharyya coefficient of N(0,1), N(1,1) is exp(-1/8).
  const double h =
      divergence_numeric(GaussianModel::univariate(0, 1), GaussianModel::univariate(1, 1), DivergenceKind::hellinger())
          .value;
  EXPECT_NEAR(h, 2.0 - 2.0 * std::exp(-0.125), 1e-10);
}

TEST(DivergenceNumeric, SingularAlpha) {
  const GaussianModel p = GaussianModel::univariate(0, 1);
  for (const double a : {0.0, 1.0}) {
    EXPECT_GIMDRE_ERROR((void)divergence_numeric(p, p, DivergenceKind::alpha_divergence(a)),
                        ErrorKind::singular_alpha);
  }
}

TEST(DivergenceNumeric, MonteCarloInTwoDimensions) {
  const GaussianModel p = GaussianModel::isotropic(Vector::Constant(2, 1.0), 1.0);
  const GaussianModel q = GaussianModel::isotropic(Vector::Zero(2), 2.0);
  // KL between isotropic Gaussians: 0.5 (d v_p/v_q + |dmu|^2/v_q - d + d log(v_q/v_p)).
  const double exact = 0.5 * (2 * 0.5 + 2.0 / 2.0 - 2.0 + 2.0 * std::log(2.0));
  const DivergenceEstimate est = divergence_numeric(p, q, DivergenceKind::kl());
  EXPECT_GT(est.std_error, 0.0);
  EXPECT_NEAR(est.value, exact, 4.0 * est.std_error);
}

TEST(DivergenceNumeric, SkewedFamilies) {
  // KL between log-normals equals KL between the underlying Gaussians.
  const double ln = divergence_numeric(LogNormalModel{3.0, 0.5}, LogNormalModel{0.0, 2.0}, DivergenceKind::kl()).value;
  EXPECT_NEAR(ln, kl_gaussian_analytic(GaussianModel::univariate(3, 0.25), GaussianModel::univariate(0, 4)), 1e-6);
  // Power laws: KL = log(a/b) + (a - b) E[log x] with E[log x] = -1/a.
  const double a = 3.0;
  const double b = 0.5;
  const double pl = divergence_numeric(PowerLawModel{a}, PowerLawModel{b}, DivergenceKind::kl()).value;
  EXPECT_NEAR(pl, std::log(a / b) - (a - b) / a, 1e-6);
}

TEST(ScaledDivergence, ExactRatioGivesZero) {
  const DensityModel p = GaussianModel::univariate(8.0, 3.0);
  const DensityModel q = GaussianModel::univariate(0.0, 2.0);
  const RatioFn r = true_ratio(p, q);
  EXPECT_NEAR(unnormalized_kl(p, q, r).value, 0.0, 1e-10);
  EXPECT_NEAR(pearson_to_scaled(p, q, r).value, 0.0, 1e-12);
}

TEST(ScaledDivergence, ConstantScale) {
  const DensityModel p = GaussianModel::univariate(1.0, 2.0);
  for (const double c : {0.5, 2.0, 4.0}) {
    const RatioFn r = [c](const PointRef&) { return c; };
    EXPECT_NEAR(unnormalized_kl(p, p, r).value, c - 1.0 - std::log(c), 1e-12);
    EXPECT_NEAR(pearson_to_scaled(p, p, r).value, 0.5 * (1.0 - c) * (1.0 - c), 1e-12);
  }
  const DensityModel p2 = GaussianModel::isotropic(Vector::Zero(2), 1.0);
  const auto est = unnormalized_kl(p2, p2, [](const PointRef&) { return 2.0; });
  EXPECT_NEAR(est.value, 1.0 - std::log(2.0), 1e-12);
}

// The two divergences agree up to a third-order term in the log-ratio error.
TEST(ScaledDivergence, ThirdOrderAgreement) {
  const DensityModel p = GaussianModel::univariate(1.0, 1.0);
  const DensityModel q = GaussianModel::univariate(0.0, 1.5);
  const RatioFn r = true_ratio(p, q);
  const auto gap = [&](double eps) {
    const RatioFn r_hat = [&r, eps](const PointRef& x) { return r(x) * std::exp(eps * (0.5 + std::tanh(x[0]))); };
    return std::abs(unnormalized_kl(p, q, r_hat).value - pearson_to_scaled(p, q, r_hat).value);
  };
  const double factor = gap(0.1) / gap(0.05);
  EXPECT_GE(factor, 4.0);
  EXPECT_LE(factor, 32.0);
  EXPECT_NEAR(factor, 8.0, 1.0);
}

}  // namespace
}  // namespace gimdre
