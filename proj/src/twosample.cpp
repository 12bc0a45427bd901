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

#include "gimdre/twosample.hpp"

#include <numeric>

#include "gimdre/error.hpp"
#include "gimdre/parallel.hpp"

namespace gimdre {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double statistic(const Samples& xs, const Samples& xt, const TwoSampleFit& fit) {
  return std::visit(overloaded{
                        [&](const DreBaseConfig& base) {
                          const LogisticModel model = fit_direct(xs, xt, base);
                          return pearson_divergence_estimate(
                              [&](const PointRef& x) { return ratio_from_classifier(model, x); }, xs, xt);
                        },
                        [&](const GimdreConfig& cfg) {
                          const GimdreResult res = gimdre_fit(xs, xt, cfg);
                          return pearson_divergence_estimate(res.estimator.as_function(), xs, xt);
                        },
                    },
                    fit);
}

}  // namespace

double pearson_divergence_estimate(const RatioFn& r_hat, const Samples& xs, const Samples& xt) {
  if (xs.rows() == 0 || xt.rows() == 0) {
    throw Error(ErrorKind::empty_input, "Pearson estimate needs both samples");
  }
  double ss = 0.0;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    ss += r_hat(row(xs, i));
  }
  double st = 0.0;
  for (Eigen::Index i = 0; i < xt.rows(); ++i) {
    st += r_hat(row(xt, i));
  }
  return ss / (2.0 * static_cast<double>(xs.rows())) - st / static_cast<double>(xt.rows()) + 0.5;
}

double permutation_p_value(double observed, std::span<const double> null_stats) {
  std::size_t at_least = 0;
  for (const double s : null_stats) {
    at_least += (s >= observed) ? 1 : 0;
  }
  return static_cast<double>(1 + at_least) / static_cast<double>(null_stats.size() + 1);
}

PermutationTestResult permutation_test(const Samples& xs, const Samples& xt, std::size_t K, const TwoSampleFit& fit,
                                       std::uint64_t seed, std::size_t jobs) {
  if (xs.rows() == 0 || xt.rows() == 0) {
    throw Error(ErrorKind::empty_input, "permutation test needs both samples");
  }
  if (xs.rows() != xt.rows()) {
    throw Error(ErrorKind::unsupported_split, "permutation test requires n_s = n_t");
  }
  if (xs.cols() != xt.cols()) {
    throw Error(ErrorKind::dimension_mismatch, "source and target samples differ in dimension");
  }
  if (K < 1) {
    throw Error(ErrorKind::invalid_argument, "K must be at least 1");
  }
  PermutationTestResult res;
  res.K = K;
  res.seed = seed;
  try {
    res.observed = statistic(xs, xt, fit);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("observed split: ") + e.what());
  }

  const Eigen::Index n = xs.rows();
  Samples pooled(2 * n, xs.cols());
  pooled << xs, xt;
  res.null_stats.assign(K, 0.0);
  parallel_for(K, jobs, [&](std::size_t k) {
    Rng rng(derive_seed(seed, {k}));
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(2 * n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(idx[i - 1], idx[pick(rng)]);
    }
    Samples a(n, xs.cols());
    Samples b(n, xs.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      a.row(i) = pooled.row(idx[static_cast<std::size_t>(i)]);
      b.row(i) = pooled.row(idx[static_cast<std::size_t>(n + i)]);
    }
    try {
      res.null_stats[k] = statistic(a, b, fit);
    } catch (const Error& e) {
      throw Error(e.kind(), "shuffle " + std::to_string(k) + ": " + e.what());
    }
  });
  res.p_value = permutation_p_value(res.observed, res.null_stats);
  return res;
}

nlohmann::json to_json(const PermutationTestResult& result, const std::string& config_hash) {
  return {
      {"observed", result.observed}, {"p_value", result.p_value}, {"K", result.K},
      {"null_stats", result.null_stats}, {"seed", result.seed},     {"config_hash", config_hash},
  };
}

}  // namespace gimdre
