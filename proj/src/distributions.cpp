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

#include "gimdre/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gimdre/error.hpp"

namespace gimdre {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_point(const PointRef& x, std::size_t dim) {
  if (static_cast<std::size_t>(x.size()) != dim) {
    throw Error(ErrorKind::dimension_mismatch,
                "point has dimension " + std::to_string(x.size()) + ", model expects " + std::to_string(dim));
  }
  if (x.hasNaN()) {
    throw Error(ErrorKind::invalid_argument, "point has NaN coordinates");
  }
}

// Leaf models reachable through geodesic wrappers.
void collect_leaves(const DensityModel& m, std::vector<const DensityModel*>& out) {
  if (const auto* g = m.get_if<GeodesicDensity>()) {
    collect_leaves(*g->p, out);
    collect_leaves(*g->q, out);
  } else {
    out.push_back(&m);
  }
}

}  // namespace

GaussianModel::GaussianModel(Vector mean, Eigen::MatrixXd cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  const auto d = mean_.size();
  if (d == 0) {
    throw Error(ErrorKind::invalid_argument, "Gaussian mean must be non-empty");
  }
  if (cov_.rows() != d || cov_.cols() != d) {
    throw Error(ErrorKind::dimension_mismatch, "covariance shape does not match the mean");
  }
  if (!mean_.allFinite() || !cov_.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "Gaussian parameters must be finite");
  }
  if (!cov_.isApprox(cov_.transpose(), 1e-12)) {
    throw Error(ErrorKind::invalid_argument, "covariance must be symmetric");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  if (llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 0.0) {
    throw Error(ErrorKind::invalid_argument, "covariance must be positive definite");
  }
  chol_ = llt.matrixL();
  const double log_det = 2.0 * chol_.diagonal().array().log().sum();
  log_norm_ = -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det);
}

GaussianModel GaussianModel::univariate(double mean, double variance) {
  return {Vector::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, variance)};
}

GaussianModel GaussianModel::isotropic(Vector mean, double variance) {
  const auto d = mean.size();
  return {std::move(mean), variance * Eigen::MatrixXd::Identity(d, d)};
}

double GaussianModel::log_density(const PointRef& x) const {
  const Vector z = chol_.triangularView<Eigen::Lower>().solve(x - mean_);
  return log_norm_ - 0.5 * z.squaredNorm();
}

void GaussianModel::sample_into(Samples& out, Rng& rng) const {
  std::normal_distribution<double> normal;
  Vector z(mean_.size());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      z(j) = normal(rng);
    }
    out.row(i) = (mean_ + chol_ * z).transpose();
  }
}

DensityModel::DensityModel(LogNormalModel m) : model_(m) {
  if (!std::isfinite(m.mu) || !(m.sigma > 0.0) || !std::isfinite(m.sigma)) {
    throw Error(ErrorKind::invalid_argument, "log-normal needs finite mu and sigma > 0");
  }
}

DensityModel::DensityModel(PowerLawModel m) : model_(m) {
  if (!(m.a > 0.0) || !std::isfinite(m.a)) {
    throw Error(ErrorKind::invalid_argument, "power-law exponent a must be positive");
  }
}

DensityModel::DensityModel(GeodesicDensity m) : model_(std::move(m)) {
  const auto& g = std::get<GeodesicDensity>(model_);
  if (!g.p || !g.q) {
    throw Error(ErrorKind::missing_argument, "geodesic density needs both endpoints");
  }
  if (g.p->dim() != g.q->dim()) {
    throw Error(ErrorKind::dimension_mismatch, "geodesic endpoints differ in dimension");
  }
  validate(g.params);
}

std::size_t DensityModel::dim() const {
  return std::visit(overloaded{
                        [](const GaussianModel& g) { return g.dim(); },
                        [](const GeodesicDensity& g) { return g.p->dim(); },
                        [](const auto&) -> std::size_t { return 1; },
                    },
                    model_);
}

DensityModel geodesic_model(DensityModel p, DensityModel q, GeodesicParams params) {
  return GeodesicDensity{std::make_shared<const DensityModel>(std::move(p)),
                         std::make_shared<const DensityModel>(std::move(q)), params};
}

double log_density(const DensityModel& model, const PointRef& x) {
  check_point(x, model.dim());
  return std::visit(
      overloaded{
          [&](const GaussianModel& g) { return g.log_density(x); },
          [&](const LogNormalModel& m) {
            const double v = x(0);
            if (!(v > 0.0)) {
              return kNegInf;
            }
            const double z = (std::log(v) - m.mu) / m.sigma;
            return -std::log(v * m.sigma) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
          },
          [&](const PowerLawModel& m) {
            const double v = x(0);
            if (v < 0.0 || v > 1.0) {
              return kNegInf;
            }
            if (m.a == 1.0) {
              return 0.0;
            }
            return std::log(m.a) + (m.a - 1.0) * std::log(v);
          },
          [&](const GeodesicDensity& g) {
            const double lp = log_density(*g.p, x);
            const double lq = log_density(*g.q, x);
            return geodesic_log_density(lp, lq, g.params);
          },
      },
      model.variant());
}

double density(const DensityModel& model, const PointRef& x) { return std::exp(log_density(model, x)); }

double log_density(const DensityModel& model, double x) {
  const Vector v = Vector::Constant(1, x);
  return log_density(model, PointRef(v));
}

double density(const DensityModel& model, double x) { return std::exp(log_density(model, x)); }

Samples sample(const DensityModel& model, std::size_t n, Rng& rng) {
  if (n == 0) {
    throw Error(ErrorKind::invalid_argument, "sample size must be positive");
  }
  Samples out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(model.dim()));
  std::visit(overloaded{
                 [&](const GaussianModel& g) { g.sample_into(out, rng); },
                 [&](const LogNormalModel& m) {
                   std::normal_distribution<double> normal(m.mu, m.sigma);
                   for (Eigen::Index i = 0; i < out.rows(); ++i) {
                     out(i, 0) = std::exp(normal(rng));
                   }
                 },
                 [&](const PowerLawModel& m) {
                   // Inverse CDF: F(x) = x^a.
                   std::uniform_real_distribution<double> uniform(0.0, 1.0);
                   for (Eigen::Index i = 0; i < out.rows(); ++i) {
                     out(i, 0) = std::pow(uniform(rng), 1.0 / m.a);
                   }
                 },
                 [&](const GeodesicDensity&) {
                   throw Error(ErrorKind::unsupported_model, "geodesic densities cannot be sampled directly");
                 },
             },
             model.variant());
  return out;
}

Samples sample(const DensityModel& model, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample(model, n, rng);
}

double log_true_ratio(const DensityModel& p, const DensityModel& q, const PointRef& x) {
  return log_density(p, x) - log_density(q, x);
}

RatioFn true_ratio(DensityModel p, DensityModel q) {
  return [p = std::move(p), q = std::move(q)](const PointRef& x) { return std::exp(log_true_ratio(p, q, x)); };
}

double kl_gaussian_analytic(const GaussianModel& p, const GaussianModel& q) {
  if (p.dim() != 1 || q.dim() != 1) {
    throw Error(ErrorKind::dimension_mismatch, "analytic KL is implemented for univariate Gaussians");
  }
  const double s1 = p.stddev();
  const double s2 = q.stddev();
  const double dm = p.mean()(0) - q.mean()(0);
  return std::log(s2 / s1) + (s1 * s1 + dm * dm) / (2.0 * s2 * s2) - 0.5;
}

QuadratureRule quadrature_rule(const DensityModel& p, const DensityModel& q, const QuadratureSpec& quad) {
  if (p.dim() != 1 || q.dim() != 1) {
    throw Error(ErrorKind::dimension_mismatch, "quadrature rules are univariate");
  }
  std::vector<const DensityModel*> leaves;
  collect_leaves(p, leaves);
  collect_leaves(q, leaves);
  const double hw = quad.half_width;

  const auto all = [&](auto pred) { return std::all_of(leaves.begin(), leaves.end(), pred); };
  if (all([](const DensityModel* m) { return m->get_if<LogNormalModel>() != nullptr; })) {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (const auto* m : leaves) {
      const auto& ln = *m->get_if<LogNormalModel>();
      lo = std::min(lo, ln.mu - hw * ln.sigma);
      hi = std::max(hi, ln.mu + hw * ln.sigma);
    }
    const auto e = [](double u) { return std::exp(u); };
    return transform(gauss_legendre(lo, hi, quad.panels), e, e);
  }
  if (all([](const DensityModel* m) { return m->get_if<PowerLawModel>() != nullptr; })) {
    double a_min = INFINITY;
    for (const auto* m : leaves) {
      a_min = std::min(a_min, m->get_if<PowerLawModel>()->a);
    }
    const double k = std::max(1.0, std::ceil(2.0 / a_min));
    return transform(
        gauss_legendre(0.0, 1.0, quad.panels), [k](double u) { return std::pow(u, k); },
        [k](double u) { return k * std::pow(u, k - 1.0); });
  }

  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto* m : leaves) {
    std::visit(overloaded{
                   [&](const GaussianModel& g) {
                     lo = std::min(lo, g.mean()(0) - hw * g.stddev());
                     hi = std::max(hi, g.mean()(0) + hw * g.stddev());
                   },
                   [&](const LogNormalModel& ln) {
                     lo = std::min(lo, 0.0);
                     hi = std::max(hi, std::exp(ln.mu + hw * ln.sigma));
                   },
                   [&](const PowerLawModel&) {
                     lo = std::min(lo, 0.0);
                     hi = std::max(hi, 1.0);
                   },
                   [](const GeodesicDensity&) {},
               },
               m->variant());
  }
  return gauss_legendre(lo, hi, quad.panels);
}

namespace {

double divergence_term(DivergenceKind kind, double lp, double lq) {
  using T = DivergenceKind::Type;
  if (lp == kNegInf && lq == kNegInf) {
    return 0.0;
  }
  switch (kind.type) {
    case T::kl:
      return lp == kNegInf ? 0.0 : std::exp(lp) * (lp - lq);
    case T::alpha:
      return std::exp(kind.alpha * lp + (1.0 - kind.alpha) * lq);
    case T::pearson: {
      const double t = std::expm1(lp - lq);
      return 0.5 * std::exp(lq) * t * t;
    }
    case T::hellinger: {
      const double t = std::exp(0.5 * lp) - std::exp(0.5 * lq);
      return t * t;
    }
  }
  return 0.0;
}

void check_kind(DivergenceKind kind) {
  if (kind.type == DivergenceKind::Type::alpha && (kind.alpha == 0.0 || kind.alpha == 1.0)) {
    throw Error(ErrorKind::singular_alpha, "alpha-divergence is singular at alpha in {0, 1}; use hellinger or kl");
  }
  if (kind.type == DivergenceKind::Type::alpha && !std::isfinite(kind.alpha)) {
    throw Error(ErrorKind::invalid_argument, "alpha must be finite");
  }
}

double finish_alpha(double integral, double alpha) { return (1.0 - integral) / (alpha * (1.0 - alpha)); }

}  // namespace

DivergenceEstimate divergence_numeric(const DensityModel& p, const DensityModel& q, DivergenceKind kind,
                                      const QuadratureSpec& quad) {
  check_kind(kind);
  if (p.dim() != q.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "models differ in dimension");
  }
  using T = DivergenceKind::Type;

  if (p.dim() == 1) {
    const QuadratureRule rule = quadrature_rule(p, q, quad);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double lp = log_density(p, rule.nodes[i]);
      const double lq = log_density(q, rule.nodes[i]);
      sum += rule.weights[i] * divergence_term(kind, lp, lq);
    }
    if (!std::isfinite(sum)) {
      throw Error(ErrorKind::numeric_failure, "divergence quadrature is not finite");
    }
    if (kind.type == T::alpha) {
      sum = finish_alpha(sum, kind.alpha);
    }
    return {sum, 0.0};
  }

  // Monte Carlo under p: every kind is an expectation of a function of
  // the log ratio t = log q - log p.
  const Samples xs = sample(p, quad.mc_samples, quad.mc_seed);
  const auto n = static_cast<double>(xs.rows());
  double mean = 0.0;
  double m2 = 0.0;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const auto x = row(xs, i);
    const double t = log_density(q, x) - log_density(p, x);
    double v = 0.0;
    switch (kind.type) {
      case T::kl: v = -t; break;
      case T::alpha: v = std::exp((1.0 - kind.alpha) * t); break;
      case T::pearson: v = 0.5 * std::expm1(-t); break;
      case T::hellinger: v = 2.0 - 2.0 * std::exp(0.5 * t); break;
    }
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  double se = std::sqrt(m2 / (n - 1.0) / n);
  if (kind.type == T::alpha) {
    mean = finish_alpha(mean, kind.alpha);
    se /= std::abs(kind.alpha * (1.0 - kind.alpha));
  }
  if (!std::isfinite(mean)) {
    throw Error(ErrorKind::numeric_failure, "Monte Carlo divergence is not finite");
  }
  return {mean, se};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integrates f(lp, lq, log r_hat) over the support of p. In one dimension
// the rule covers both supports; otherwise f is split into a part averaged
// under p (`under_p`) and a part averaged under q (`under_q`).
template <class UnderP, class UnderQ>
DivergenceEstimate scaled_divergence(const DensityModel& p, const DensityModel& q, const RatioFn& r_hat,
                                     const QuadratureSpec& quad, UnderP under_p, UnderQ under_q) {
  if (p.dim() != q.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "models differ in dimension");
  }
  if (p.dim() == 1) {
    const QuadratureRule rule = quadrature_rule(p, q, quad);
    double sum = 0.0;
    Vector x(1);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      x(0) = rule.nodes[i];
      const double lp = log_density(p, x);
      const double lq = log_density(q, x);
      if (lp == -kInf && lq == -kInf) {
        continue;
      }
      const double lr = std::log(r_hat(x));
      double v = 0.0;
      if (lp > -kInf) {
        v += std::exp(lp) * under_p(lp, lq, lr);
      }
      if (lq > -kInf) {
        v += std::exp(lq) * under_q(lp, lq, lr);
      }
      sum += rule.weights[i] * v;
    }
    if (!std::isfinite(sum)) {
      throw Error(ErrorKind::numeric_failure, "divergence quadrature is not finite");
    }
    return {sum, 0.0};
  }

  DivergenceEstimate total;
  double var = 0.0;
  const auto average = [&](const DensityModel& m, std::uint64_t tag, auto f) {
    const Samples xs = sample(m, quad.mc_samples, derive_seed(quad.mc_seed, {tag}));
    double mean = 0.0;
    double m2 = 0.0;
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
      const auto x = row(xs, i);
      const double v = f(log_density(p, x), log_density(q, x), std::log(r_hat(x)));
      const double delta = v - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (v - mean);
    }
    const auto n = static_cast<double>(xs.rows());
    total.value += mean;
    var += m2 / (n - 1.0) / n;
  };
  average(p, 0, under_p);
  average(q, 1, under_q);
  total.std_error = std::sqrt(var);
  if (!std::isfinite(total.value)) {
    throw Error(ErrorKind::numeric_failure, "Monte Carlo divergence is not finite");
  }
  return total;
}

}  // namespace

DivergenceEstimate unnormalized_kl(const DensityModel& p, const DensityModel& q, const RatioFn& r_hat,
                                   const QuadratureSpec& quad) {
  // int p (log p - log r_hat - log q - 1) + int q r_hat, using int p = 1.
  return scaled_divergence(
      p, q, r_hat, quad, [](double lp, double lq, double lr) { return lp - lr - lq - 1.0; },
      [](double, double, double lr) { return std::exp(lr); });
}

DivergenceEstimate pearson_to_scaled(const DensityModel& p, const DensityModel& q, const RatioFn& r_hat,
                                     const QuadratureSpec& quad) {
  // (1/2) int p (1 - r_hat q / p)^2 entirely under p.
  return scaled_divergence(
      p, q, r_hat, quad,
      [](double lp, double lq, double lr) {
        const double e = std::expm1(lr + lq - lp);
        return 0.5 * e * e;
      },
      [](double, double, double) { return 0.0; });
}

}  // namespace gimdre
