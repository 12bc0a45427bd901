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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gimdre/distributions.hpp"
#include "gimdre/gimdre.hpp"
#include "test_util.hpp"

namespace gimdre {
namespace {

const DensityModel kNear = GaussianModel::univariate(1.0, 1.0);
const DensityModel kOrigin = GaussianModel::univariate(0.0, 1.0);

Vector point(double v) {
  Vector x(1);
  x << v;
  return x;
}

TEST(GimdreConfig, Validation) {
  GimdreConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  auto bad = cfg;
  bad.outer_iters = 0;
  EXPECT_GIMDRE_ERROR(bad.validate(), ErrorKind::invalid_argument);
  bad = cfg;
  bad.m = 0;
  EXPECT_GIMDRE_ERROR(bad.validate(), ErrorKind::invalid_argument);
  bad = cfg;
  bad.clip_low = 2.0;
  bad.clip_high = 1.0;
  EXPECT_GIMDRE_ERROR(bad.validate(), ErrorKind::invalid_argument);
  bad = cfg;
  bad.min_bridge_ess = -1.0;
  EXPECT_GIMDRE_ERROR(bad.validate(), ErrorKind::invalid_argument);
  bad = cfg;
  bad.alpha = 1.0;
  bad.branch = GeodesicBranch::power;
  EXPECT_GIMDRE_ERROR(bad.validate(), ErrorKind::singular_alpha);
  bad.branch = GeodesicBranch::automatic;
  EXPECT_NO_THROW(bad.validate());
  bad = cfg;
  bad.schedule_mode = ScheduleMode::explicit_list;
  EXPECT_GIMDRE_ERROR(bad.validate(), ErrorKind::invalid_argument);
  bad.lambdas = {0.3, 0.6};
  EXPECT_NO_THROW(bad.validate());
  EXPECT_EQ(gimdre_schedule(bad).m(), 2u);
  bad = cfg;
  bad.schedule_mode = ScheduleMode::arc_length;
  EXPECT_GIMDRE_ERROR((void)gimdre_schedule(bad), ErrorKind::missing_argument);
}

TEST(BridgeWeights, Endpoints) {
  Vector r(4);
  r << 0.1, 1.0, 4.0, 50.0;
  for (const double alpha : {-1.0, 1.0, 3.0}) {
    EXPECT_TRUE(bridge_weights(r, alpha, 0.0, Proxy::source).isOnes());
    EXPECT_LE((bridge_weights(r, alpha, 1.0, Proxy::source) - r.cwiseInverse()).norm(), 1e-14);
    EXPECT_TRUE(bridge_weights(r, alpha, 1.0, Proxy::target).isOnes());
    EXPECT_LE((bridge_weights(r, alpha, 0.0, Proxy::target) - r).norm(), 1e-12);
  }
}

// Under the true ratio the alpha = -1 weights turn source draws into the mixture.
TEST(BridgeWeights, MinusOneReproducesMixture) {
  for (double x = -3.0; x <= 4.0; x += 0.5) {
    const double ps = density(kNear, x);
    const double pt = density(kOrigin, x);
    Vector r(1);
    r << ps / pt;
    for (const double lambda : {0.2, 0.5, 0.8}) {
      EXPECT_LE(rel_err(bridge_weights(r, -1.0, lambda, Proxy::source)[0] * ps, (1 - lambda) * ps + lambda * pt),
                1e-12);
    }
  }
}

// The consecutive bridge ratios under any r_hat multiply back to r_hat.
TEST(BridgeWeights, EndpointCoherence) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lr(-6.0, 6.0);
  const auto lambdas = bridge_schedule(20, ScheduleMode::uniform, 3.0).with_endpoints();
  for (int i = 0; i < 200; ++i) {
    const double r = std::exp(lr(rng));
    double prod = 1.0;
    for (std::size_t k = 0; k + 1 < lambdas.size(); ++k) {
      prod *= weight_ratio(r, 3.0, lambdas[k], lambdas[k + 1]);
    }
    EXPECT_LE(rel_err(prod, r), 1e-10);
  }
}

TEST(GimdreFit, MinusOneWithTrueWarmStartTracksTruth) {
  const Samples xs = sample(kNear, 2000, 2);
  const Samples xt = sample(kOrigin, 2000, 3);
  GimdreConfig cfg;
  cfg.alpha = -1.0;
  cfg.m = 3;
  cfg.outer_iters = 1;
  GimdreOptions opt;
  opt.warm_start = true_ratio(kNear, kOrigin);
  const auto res = gimdre_fit(xs, xt, cfg, opt);
  EXPECT_EQ(res.estimator.stages().size(), 4u);
  for (const double v : {-0.5, 0.5, 1.5}) {
    EXPECT_NEAR(res.estimator.log_ratio(point(v)), v - 0.5, 0.25) << v;
  }
}

TEST(GimdreFit, TraceShapeAndDeterminism) {
  const Samples xs = sample(kNear, 300, 4);
  const Samples xt = sample(kOrigin, 300, 5);
  GimdreConfig cfg;
  cfg.m = 8;
  cfg.outer_iters = 3;
  cfg.seed = 11;
  GimdreOptions opt;
  opt.oracle = GimdreOracle{true_ratio(kNear, kOrigin), sample(kNear, 100, 6)};
  const auto a = gimdre_fit(xs, xt, cfg, opt);
  opt.jobs = 3;
  const auto b = gimdre_fit(xs, xt, cfg, opt);
  ASSERT_EQ(a.trace.iterations.size(), 3u);
  ASSERT_TRUE(a.trace.initial_mae.has_value());
  for (std::size_t it = 0; it < 3; ++it) {
    const auto& ia = a.trace.iterations[it];
    const auto& ib = b.trace.iterations[it];
    EXPECT_EQ(ia.iteration, it + 1);
    ASSERT_EQ(ia.bridges.size(), cfg.m + 2);
    EXPECT_EQ(ia.bridges.front().lambda, 0.0);
    EXPECT_EQ(ia.bridges.back().lambda, 1.0);
    EXPECT_DOUBLE_EQ(ia.bridges.front().ess, 300.0);
    ASSERT_TRUE(ia.mae.has_value());
    EXPECT_EQ(*ia.mae, *ib.mae);
    EXPECT_EQ(ia.delta, ib.delta);
    for (std::size_t k = 0; k < ia.bridges.size(); ++k) {
      EXPECT_EQ(ia.bridges[k].ess, ib.bridges[k].ess);
    }
  }
  for (const double v : {-1.0, 0.0, 2.0}) {
    EXPECT_EQ(a.estimator(point(v)), b.estimator(point(v)));
  }
}

TEST(GimdreFit, CollapsedBridgeOnSeparatedPair) {
  const DensityModel s = GaussianModel::univariate(8.0, 3.0);
  const DensityModel t = GaussianModel::univariate(0.0, 2.0);
  const Samples xs = sample(s, 500, 7);
  const Samples xt = sample(t, 500, 8);
  GimdreConfig cfg;
  cfg.m = 10;
  cfg.outer_iters = 1;
  // The lambda = 1 weights 1/r have ESS of a few draws here.
  cfg.min_bridge_ess = 50.0;
  EXPECT_GIMDRE_ERROR((void)gimdre_fit(xs, xt, cfg), ErrorKind::collapsed_bridge);
  cfg.min_bridge_ess = 0.0;
  EXPECT_NO_THROW((void)gimdre_fit(xs, xt, cfg));
}

TEST(GimdreFit, InputChecks) {
  const Samples xs = sample(kNear, 10, 9);
  GimdreConfig cfg;
  cfg.m = 2;
  EXPECT_GIMDRE_ERROR((void)gimdre_fit(xs.topRows(1), xs, cfg), ErrorKind::empty_input);
  EXPECT_GIMDRE_ERROR((void)gimdre_fit(xs, Samples::Zero(10, 2), cfg), ErrorKind::dimension_mismatch);
}

TEST(GimdreFit, TargetProxyRuns) {
  const Samples xs = sample(kNear, 400, 10);
  const Samples xt = sample(kOrigin, 400, 11);
  GimdreConfig cfg;
  cfg.m = 5;
  cfg.proxy = Proxy::target;
  const auto res = gimdre_fit(xs, xt, cfg);
  EXPECT_NEAR(res.estimator.log_ratio(point(0.5)), 0.0, 0.3);
}

// Outer iterations repair a corrupted warm start.
TEST(GimdreFit, InterdependenceResolution) {
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Samples xs = sample(kNear, 500, derive_seed(seed, {0}));
    const Samples xt = sample(kOrigin, 500, derive_seed(seed, {1}));
    std::mt19937_64 rng(derive_seed(seed, {2}));
    std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
    const double ph = phase(rng);
    const RatioFn truth = true_ratio(kNear, kOrigin);
    GimdreConfig cfg;
    cfg.m = 10;
    cfg.outer_iters = 3;
    cfg.seed = seed;
    GimdreOptions opt;
    opt.warm_start = [truth, ph](const PointRef& x) { return truth(x) * std::exp(0.5 * std::sin(3.0 * x[0] + ph)); };
    Samples eval(1000, 1);
    eval << sample(kNear, 500, derive_seed(seed, {3})), sample(kOrigin, 500, derive_seed(seed, {4}));
    opt.oracle = GimdreOracle{truth, eval};
    const auto res = gimdre_fit(xs, xt, cfg, opt);
    improved += *res.trace.iterations[2].mae <= *res.trace.iterations[0].mae ? 1 : 0;
  }
  EXPECT_GE(improved, 7);
}

}  // namespace
}  // namespace gimdre
