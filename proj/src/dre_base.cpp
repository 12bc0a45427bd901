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

#include "gimdre/dre_base.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "gimdre/error.hpp"

namespace gimdre {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

bool has_feature_map(const KernelSpec& k) { return !std::holds_alternative<CubicSplineKernel>(k); }

std::size_t feature_dim(const KernelSpec& k, std::size_t d) {
  if (std::holds_alternative<LinearKernel>(k)) {
    return d;
  }
  return d * (d + 1) / 2 + d + 1;
}

// Left feature map Phi(u); K(u, v) = Phi(u)^T Phi_c(v).
void features(const KernelSpec& k, const PointRef& u, Eigen::Ref<Vector> out) {
  const Index d = u.size();
  if (std::holds_alternative<LinearKernel>(k)) {
    out = u;
    return;
  }
  Index t = 0;
  for (Index i = 0; i < d; ++i) {
    out(t++) = u(i) * u(i);
    for (Index j = i + 1; j < d; ++j) {
      out(t++) = std::numbers::sqrt2 * u(i) * u(j);
    }
  }
  for (Index i = 0; i < d; ++i) {
    out(t++) = std::numbers::sqrt2 * u(i);
  }
  out(t) = 1.0;
}

// Right feature map Phi_c(v), which carries the offset c.
void center_features(const KernelSpec& k, const PointRef& v, Eigen::Ref<Vector> out) {
  features(k, v, out);
  if (const auto* poly = std::get_if<PolynomialKernel>(&k)) {
    const Index d = v.size();
    const Index lin = d * (d + 1) / 2;
    out.segment(lin, d) *= poly->c;
    out(lin + d) = poly->c * poly->c;
  }
}

void check_weights(const Vector& w, Index rows, const char* name) {
  if (w.size() != rows) {
    throw Error(ErrorKind::dimension_mismatch, std::string(name) + " weights do not match the sample count");
  }
  if (!w.allFinite() || (w.array() < 0.0).any()) {
    throw Error(ErrorKind::invalid_argument, std::string(name) + " weights must be finite and nonnegative");
  }
  if (!(w.sum() > 0.0)) {
    throw Error(ErrorKind::degenerate_weights, std::string(name) + " class has zero total weight");
  }
}

// Deduplicated pooled rows, subsampled to at most max_centers.
Samples select_centers(const Samples& x, std::size_t max_centers, std::uint64_t seed) {
  std::vector<Index> idx(static_cast<std::size_t>(x.rows()));
  std::iota(idx.begin(), idx.end(), Index{0});
  const auto row_less = [&](Index a, Index b) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (x(a, j) != x(b, j)) {
        return x(a, j) < x(b, j);
      }
    }
    return false;
  };
  std::sort(idx.begin(), idx.end(), [&](Index a, Index b) { return row_less(a, b) || (!row_less(b, a) && a < b); });
  idx.erase(std::unique(idx.begin(), idx.end(), [&](Index a, Index b) { return !row_less(a, b) && !row_less(b, a); }),
            idx.end());
  if (idx.size() > max_centers) {
    Rng rng(seed);
    std::vector<std::size_t> pos(idx.size());
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    for (std::size_t i = 0; i < max_centers; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pos.size() - 1);
      std::swap(pos[i], pos[pick(rng)]);
    }
    pos.resize(max_centers);
    std::sort(pos.begin(), pos.end());
    std::vector<Index> kept;
    kept.reserve(max_centers);
    for (const auto p : pos) {
      kept.push_back(idx[p]);
    }
    idx = std::move(kept);
  }
  Samples c(static_cast<Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    c.row(static_cast<Index>(i)) = x.row(idx[i]);
  }
  return c;
}

struct NewtonResult {
  Vector v;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Minimizes sum_i w_i softplus(-y_i s_i) + reg |v|^2 with s = v_0 + Z v_{1:}.
class NewtonSolver {
 public:
  NewtonSolver(const MatrixXd& z, const Vector& y, const Vector& w, double reg) : z_(z), y_(y), w_(w), reg_(reg) {}

  [[nodiscard]] double objective(const Vector& v) const {
    const Vector s = scores(v);
    double f = reg_ * v.squaredNorm();
    for (Index i = 0; i < s.size(); ++i) {
      if (w_(i) != 0.0) {
        f += w_(i) * softplus(-y_(i) * s(i));
      }
    }
    return f;
  }

  NewtonResult solve(Vector v, const OptimizerSettings& opt) const {
    const Index p = v.size();
    NewtonResult res;
    double f = objective(v);
    for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
      const Vector s = scores(v);
      Vector coef(s.size());
      Vector curv(s.size());
      for (Index i = 0; i < s.size(); ++i) {
        const double pr = sigmoid(-y_(i) * s(i));
        coef(i) = -w_(i) * y_(i) * pr;
        curv(i) = w_(i) * pr * (1.0 - pr);
      }
      Vector g(p);
      g(0) = coef.sum();
      g.tail(p - 1) = z_.transpose() * coef;
      g += 2.0 * reg_ * v;
      if (g.lpNorm<Eigen::Infinity>() <= opt.tolerance) {
        res.converged = true;
        break;
      }
      MatrixXd h(p, p);
      const MatrixXd wz = z_.array().colwise() * curv.array();
      h(0, 0) = curv.sum();
      h.block(1, 0, p - 1, 1) = wz.colwise().sum().transpose();
      h.block(0, 1, 1, p - 1) = wz.colwise().sum();
      h.block(1, 1, p - 1, p - 1).noalias() = z_.transpose() * wz;
      h.diagonal().array() += 2.0 * reg_;
      const Vector step = -h.ldlt().solve(g);
      const double slope = g.dot(step);
      // Predicted decrease below the rounding level of f: nothing left to gain.
      if (-slope <= 1e-13 * std::max(1.0, std::abs(f))) {
        res.converged = true;
        break;
      }
      double t = 1.0;
      Vector trial = v + step;
      double f_trial = objective(trial);
      int halvings = 0;
      while (!(f_trial <= f + 1e-4 * t * slope) && halvings < 60) {
        t *= 0.5;
        trial = v + t * step;
        f_trial = objective(trial);
        ++halvings;
      }
      if (!(f_trial <= f)) {
        break;  // no further decrease representable
      }
      v = std::move(trial);
      f = f_trial;
    }
    res.v = std::move(v);
    res.objective = f;
    return res;
  }

 private:
  [[nodiscard]] Vector scores(const Vector& v) const {
    Vector s = z_ * v.tail(v.size() - 1);
    s.array() += v(0);
    return s;
  }

  const MatrixXd& z_;
  const Vector& y_;
  const Vector& w_;
  double reg_;
};

Samples stack(const Samples& a, const Samples& b) {
  Samples x(a.rows() + b.rows(), a.cols());
  x << a, b;
  return x;
}

Vector normalized_weights(const Vector& w, WeightNormalization mode) {
  if (mode == WeightNormalization::none) {
    return w;
  }
  return w * (static_cast<double>(w.size()) / w.sum());
}

}  // namespace

double kernel_eval(const KernelSpec& kernel, const PointRef& u, const PointRef& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorKind::dimension_mismatch, "kernel arguments differ in dimension");
  }
  return std::visit(overloaded{
                        [&](const LinearKernel&) { return u.dot(v); },
                        [&](const PolynomialKernel& k) {
                          const double t = u.dot(v) + k.c;
                          return t * t;
                        },
                        [&](const CubicSplineKernel&) {
                          const double r = (u - v).norm();
                          return r * r * r;
                        },
                    },
                    kernel);
}

std::string_view kernel_name(const KernelSpec& kernel) noexcept {
  return std::visit(overloaded{
                        [](const LinearKernel&) { return std::string_view("linear"); },
                        [](const PolynomialKernel&) { return std::string_view("polynomial"); },
                        [](const CubicSplineKernel&) { return std::string_view("cubic_spline"); },
                    },
                    kernel);
}

LogisticModel::LogisticModel(KernelSpec kernel, Samples centers, Vector theta, double reg, double n_s, double n_t)
    : kernel_(kernel), centers_(std::move(centers)), theta_(std::move(theta)), reg_(reg), n_s_(n_s), n_t_(n_t) {
  if (centers_.rows() == 0 || centers_.cols() == 0) {
    throw Error(ErrorKind::invalid_argument, "logistic model needs at least one center");
  }
  if (theta_.size() != centers_.rows() + 1) {
    throw Error(ErrorKind::dimension_mismatch, "theta length must be the center count plus one");
  }
  if (!theta_.allFinite()) {
    throw Error(ErrorKind::numeric_failure, "theta is not finite");
  }
  if (!(reg_ > 0.0) || !(n_s_ > 0.0) || !(n_t_ > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "reg and class sizes must be positive");
  }
  if (const auto* poly = std::get_if<PolynomialKernel>(&kernel_); poly && !std::isfinite(poly->c)) {
    throw Error(ErrorKind::invalid_argument, "polynomial offset must be finite");
  }
  build_primal();
}

LogisticModel LogisticModel::null_model(std::size_t dim) {
  const auto d = static_cast<Index>(dim);
  return {LinearKernel{}, Samples::Identity(d, d), Vector::Zero(d + 1), 1.0, 1.0, 1.0};
}

void LogisticModel::build_primal() {
  if (!has_feature_map(kernel_)) {
    primal_.resize(0);
    return;
  }
  const auto dim_f = static_cast<Index>(feature_dim(kernel_, dim()));
  primal_ = Vector::Zero(dim_f);
  Vector phi(dim_f);
  for (Index j = 0; j < centers_.rows(); ++j) {
    center_features(kernel_, row(centers_, j), phi);
    primal_ += theta_(j + 1) * phi;
  }
}

double LogisticModel::score(const PointRef& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw Error(ErrorKind::dimension_mismatch,
                "point has dimension " + std::to_string(x.size()) + ", model expects " + std::to_string(dim()));
  }
  double s = theta_(0);
  if (primal_.size() > 0) {
    if (std::holds_alternative<LinearKernel>(kernel_)) {
      return s + primal_.dot(x);
    }
    Vector phi(primal_.size());
    features(kernel_, x, phi);
    return s + primal_.dot(phi);
  }
  for (Index j = 0; j < centers_.rows(); ++j) {
    const double r = (x - row(centers_, j)).norm();
    s += theta_(j + 1) * r * r * r;
  }
  return s;
}

double LogisticModel::log_ratio(const PointRef& x) const { return std::log(n_t_ / n_s_) + score(x); }

LogisticModel fit_weighted_logistic(const Samples& xs, const Samples& xt, const Vector& ws, const Vector& wt,
                                    const DreBaseConfig& cfg) {
  if (xs.rows() == 0 || xt.rows() == 0) {
    throw Error(ErrorKind::empty_input, "both classes need at least one sample");
  }
  if (xs.cols() != xt.cols() || xs.cols() == 0) {
    throw Error(ErrorKind::dimension_mismatch, "source and target samples differ in dimension");
  }
  if (!xs.allFinite() || !xt.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "sample rows must be finite");
  }
  if (!(cfg.reg > 0.0) || !std::isfinite(cfg.reg)) {
    throw Error(ErrorKind::invalid_argument, "reg must be positive");
  }
  if (cfg.max_centers == 0) {
    throw Error(ErrorKind::invalid_argument, "max_centers must be positive");
  }
  check_weights(ws, xs.rows(), "source");
  check_weights(wt, xt.rows(), "target");

  const Index d = xs.cols();
  const Samples x = stack(xs, xt);
  const Index n = x.rows();
  Vector y(n);
  y.head(xs.rows()).setOnes();
  y.tail(xt.rows()).setConstant(-1.0);
  Vector w(n);
  w << normalized_weights(ws, cfg.normalization), normalized_weights(wt, cfg.normalization);
  const bool per_class = cfg.normalization == WeightNormalization::per_class;
  const double n_s = per_class ? static_cast<double>(xs.rows()) : ws.sum();
  const double n_t = per_class ? static_cast<double>(xt.rows()) : wt.sum();

  // Reduced design: score = b + Z z, penalty reg (b^2 + |z|^2), and the
  // kernel coefficients are recovered as theta_k = back * z.
  Samples centers;
  MatrixXd z;
  MatrixXd back;
  if (std::holds_alternative<LinearKernel>(cfg.kernel)) {
    centers = Samples::Identity(d, d);
    z = x;
    back = MatrixXd::Identity(d, d);
  } else {
    centers = select_centers(x, cfg.max_centers, cfg.seed);
    const Index c = centers.rows();
    if (has_feature_map(cfg.kernel)) {
      // theta_k only enters through a = A theta_k with A = Phi_c(C)^T; the
      // min-norm theta_k for a given a turns the penalty into |z|^2 with
      // a = U S z, theta_k = A^T U S^-1 z.
      const auto df = static_cast<Index>(feature_dim(cfg.kernel, static_cast<std::size_t>(d)));
      MatrixXd a(df, c);
      Vector phi(df);
      for (Index j = 0; j < c; ++j) {
        center_features(cfg.kernel, row(centers, j), phi);
        a.col(j) = phi;
      }
      const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a * a.transpose());
      const Vector ev = eig.eigenvalues();
      const double cutoff = 1e-12 * std::max(ev.maxCoeff(), 0.0);
      std::vector<Index> keep;
      for (Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > cutoff && ev(i) > 0.0) {
          keep.push_back(i);
        }
      }
      const auto r = static_cast<Index>(keep.size());
      MatrixXd us(df, r);
      back.resize(c, r);
      for (Index k = 0; k < r; ++k) {
        const double s = std::sqrt(ev(keep[static_cast<std::size_t>(k)]));
        const Vector u = eig.eigenvectors().col(keep[static_cast<std::size_t>(k)]);
        us.col(k) = u * s;
        back.col(k) = a.transpose() * u / s;
      }
      MatrixXd fx(n, df);
      for (Index i = 0; i < n; ++i) {
        features(cfg.kernel, row(x, i), phi);
        fx.row(i) = phi.transpose();
      }
      z = fx * us;
    } else {
      z.resize(n, c);
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < c; ++j) {
          z(i, j) = kernel_eval(cfg.kernel, row(x, i), row(centers, j));
        }
      }
      back = MatrixXd::Identity(c, c);
    }
  }

  Vector v0 = Vector::Zero(z.cols() + 1);
  if (cfg.optimizer.initial_theta) {
    const Vector& t0 = *cfg.optimizer.initial_theta;
    if (t0.size() != centers.rows() + 1) {
      throw Error(ErrorKind::dimension_mismatch, "initial theta length must be the center count plus one");
    }
    v0(0) = t0(0);
    // back has orthonormal columns, so its transpose projects theta_k.
    v0.tail(z.cols()) = back.transpose() * t0.tail(centers.rows());
  }

  const NewtonSolver solver(z, y, w, cfg.reg);
  const NewtonResult res = solver.solve(std::move(v0), cfg.optimizer);
  if (!res.v.allFinite()) {
    throw Error(ErrorKind::numeric_failure, "logistic fit diverged");
  }
  Vector theta(centers.rows() + 1);
  theta(0) = res.v(0);
  theta.tail(centers.rows()) = back * res.v.tail(z.cols());

  LogisticModel model(cfg.kernel, std::move(centers), std::move(theta), cfg.reg, n_s, n_t);
  model.converged_ = res.converged;
  model.iterations_ = res.iterations;
  model.objective_ = res.objective;
  return model;
}

LogisticModel fit_direct(const Samples& xs, const Samples& xt, const DreBaseConfig& cfg) {
  return fit_weighted_logistic(xs, xt, Vector::Ones(xs.rows()), Vector::Ones(xt.rows()), cfg);
}

double logistic_objective(const LogisticModel& model, const Samples& xs, const Samples& xt, const Vector& ws,
                          const Vector& wt, WeightNormalization normalization) {
  check_weights(ws, xs.rows(), "source");
  check_weights(wt, xt.rows(), "target");
  const Vector vs = normalized_weights(ws, normalization);
  const Vector vt = normalized_weights(wt, normalization);
  double f = model.reg() * model.theta().squaredNorm();
  for (Index i = 0; i < xs.rows(); ++i) {
    f += vs(i) * softplus(-model.score(row(xs, i)));
  }
  for (Index i = 0; i < xt.rows(); ++i) {
    f += vt(i) * softplus(model.score(row(xt, i)));
  }
  return f;
}

double ratio_from_classifier(const LogisticModel& model, const PointRef& x) {
  return std::clamp(std::exp(model.log_ratio(x)), kRatioClipLow, kRatioClipHigh);
}

double predict_posterior(const LogisticModel& model, const PointRef& x, int y) {
  if (y != 1 && y != -1) {
    throw Error(ErrorKind::invalid_argument, "class label must be +1 or -1");
  }
  return sigmoid(static_cast<double>(y) * model.score(x));
}

}  // namespace gimdre
