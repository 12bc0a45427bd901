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
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "experiment/output.hpp"
#include "gimdre/diagnostics.hpp"
#include "gimdre/error.hpp"
#include "gimdre/experiment.hpp"
#include "gimdre/parallel.hpp"
#include "gimdre/twosample.hpp"

namespace gimdre {
namespace {

using detail::MetricRow;
using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Tags for the per-trial seed tree.
enum SeedTag : std::uint64_t {
  kSourceDraw = 0,
  kTargetDraw = 1,
  kEvalSource = 2,
  kEvalTarget = 3,
  kGimdreSeed = 4,
  kImdreSeed = 5,
  kEssDraw = 6,
  kShuffleSeed = 7,
  kDirectSeed = 8,
};

struct TrialData {
  Samples xs;
  Samples xt;
  Samples eval;
  RatioFn truth;
};

Samples stack(const Samples& a, const Samples& b) {
  Samples out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

TrialData make_data(const ExperimentConfig& cfg, const DensityModel& p, const DensityModel& q, std::size_t n_s,
                    std::size_t n_t, std::uint64_t tseed) {
  TrialData data;
  data.xs = sample(p, n_s, derive_seed(tseed, {kSourceDraw}));
  data.xt = sample(q, n_t, derive_seed(tseed, {kTargetDraw}));
  switch (cfg.eval_set) {
    case EvalSet::pooled:
      data.eval = stack(sample(p, cfg.n_eval, derive_seed(tseed, {kEvalSource})),
                        sample(q, cfg.n_eval, derive_seed(tseed, {kEvalTarget})));
      break;
    case EvalSet::source: data.eval = sample(p, cfg.n_eval, derive_seed(tseed, {kEvalSource})); break;
    case EvalSet::target: data.eval = sample(q, cfg.n_eval, derive_seed(tseed, {kEvalTarget})); break;
  }
  data.truth = true_ratio(p, q);
  return data;
}

// Collects rows of one trial; a failing metric becomes NaN.
class TrialRows {
 public:
  TrialRows(std::size_t trial, std::uint64_t seed) : trial_(trial), seed_(seed) {}

  void add(std::string name, std::optional<double> alpha, std::optional<std::size_t> m, std::optional<std::size_t> n,
           std::optional<std::size_t> d, const std::function<double()>& value) {
    double v = kNaN;
    try {
      v = value();
    } catch (const Error& e) {
      errors_.push_back({{"trial", trial_}, {"metric_name", name}, {"alpha", alpha ? json(*alpha) : json(nullptr)},
                         {"m", m ? json(*m) : json(nullptr)}, {"error", e.what()}});
    }
    rows_.push_back({trial_, seed_, alpha, m, n, d, std::move(name), v});
  }

  std::vector<MetricRow>& rows() { return rows_; }
  json& errors() { return errors_; }

 private:
  std::size_t trial_;
  std::uint64_t seed_;
  std::vector<MetricRow> rows_;
  json errors_ = json::array();
};

std::string suffix(const std::string& tag) { return tag.empty() ? "" : "[" + tag + "]"; }

// Direct, GIMDRE and IMDRE fits on one dataset.
class MethodRunner {
 public:
  MethodRunner(const ExperimentConfig& cfg, const DensityModel& p, const DensityModel& q, const TrialData& data,
               std::uint64_t tseed)
      : cfg_(cfg), p_(p), q_(q), data_(data), tseed_(tseed) {}

  bool wants(Method m) const {
    return std::find(cfg_.methods.begin(), cfg_.methods.end(), m) != cfg_.methods.end();
  }

  double direct() {
    return mae([&](const PointRef& x) { return ratio_from_classifier(direct_model(), x); }, data_.truth, data_.eval);
  }

  double gimdre(double alpha, std::size_t m, double* clip_fraction = nullptr) {
    GimdreConfig g = cfg_.gimdre;
    g.alpha = alpha;
    if (g.schedule_mode != ScheduleMode::explicit_list) {
      g.m = m;
    }
    g.seed = derive_seed(tseed_, {kGimdreSeed});
    GimdreOptions opt;
    const LogisticModel& warm = direct_model();
    opt.warm_start = [&warm](const PointRef& x) { return ratio_from_classifier(warm, x); };
    if (g.schedule_mode == ScheduleMode::arc_length) {
      opt.schedule_models.emplace(p_, q_);
    }
    const GimdreResult res = gimdre_fit(data_.xs, data_.xt, g, opt);
    if (clip_fraction) {
      *clip_fraction = res.trace.iterations.back().clip_fraction;
    }
    return mae(res.estimator.as_function(), data_.truth, data_.eval);
  }

  double imdre(std::size_t m, BridgeMode mode) {
    const BridgeSchedule schedule = imdre_schedule(m);
    const ChainedRatioEstimator est =
        telescope_fit(data_.xs, data_.xt, schedule, mode, cfg_.gimdre.base, derive_seed(tseed_, {kImdreSeed}));
    return mae(est.as_function(), data_.truth, data_.eval);
  }

 private:
  const LogisticModel& direct_model() {
    if (!direct_) {
      DreBaseConfig base = cfg_.gimdre.base;
      base.seed = derive_seed(tseed_, {kDirectSeed});
      direct_ = fit_direct(data_.xs, data_.xt, base);
    }
    return *direct_;
  }

  BridgeSchedule imdre_schedule(std::size_t m) const {
    const auto& g = cfg_.gimdre;
    switch (g.schedule_mode) {
      case ScheduleMode::explicit_list: return {g.lambdas, ScheduleMode::explicit_list, -1.0};
      case ScheduleMode::arc_length: return bridge_schedule(m, ScheduleMode::arc_length, -1.0, p_, q_);
      default: return bridge_schedule(m, g.schedule_mode, -1.0);
    }
  }

  const ExperimentConfig& cfg_;
  const DensityModel& p_;
  const DensityModel& q_;
  const TrialData& data_;
  std::uint64_t tseed_;
  std::optional<LogisticModel> direct_;
};

std::size_t cell_m(const ExperimentConfig& cfg, std::size_t m) {
  return cfg.gimdre.schedule_mode == ScheduleMode::explicit_list ? cfg.gimdre.lambdas.size() : m;
}

// Rows for one dataset: direct once, then GIMDRE per alpha and IMDRE per mode.
void mae_rows(TrialRows& out, MethodRunner& run, const ExperimentConfig& cfg, std::span<const double> alphas,
              std::span<const std::size_t> ms, std::size_t n, std::size_t d, const std::string& tag) {
  if (run.wants(Method::direct)) {
    out.add("mae/direct" + suffix(tag), std::nullopt, std::nullopt, n, d, [&] { return run.direct(); });
  }
  for (const std::size_t m0 : ms) {
    const std::size_t m = cell_m(cfg, m0);
    if (run.wants(Method::gimdre)) {
      for (const double a : alphas) {
        double clip = kNaN;
        out.add("mae/gimdre" + suffix(tag), a, m, n, d, [&] { return run.gimdre(a, m, &clip); });
        // NaN when the fit above failed; the error is already recorded.
        out.add("clip_fraction/gimdre" + suffix(tag), a, m, n, d, [&] { return clip; });
      }
    }
    if (run.wants(Method::imdre)) {
      for (const BridgeMode mode : cfg.bridge_modes) {
        const std::string t = tag.empty() ? std::string(to_string(mode)) : tag + "," + std::string(to_string(mode));
        out.add("mae/imdre" + suffix(t), -1.0, m, n, d, [&] { return run.imdre(m, mode); });
      }
    }
  }
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, std::size_t trial) { return derive_seed(cfg.seed, {trial}); }

std::size_t dim_of(const DensityModel& m) { return m.dim(); }

struct KindOutput {
  std::vector<MetricRow> rows;
  json errors = json::array();
  // Extra files: name and contents.
  std::vector<std::pair<std::string, std::string>> text_files;
  std::vector<std::pair<std::string, json>> json_files;
};

template <class F>
KindOutput per_trial(const ExperimentConfig& cfg, std::size_t jobs, F&& body) {
  std::vector<std::optional<TrialRows>> trials(cfg.trials);
  parallel_for(cfg.trials, jobs, [&](std::size_t t) {
    const std::uint64_t ts = trial_seed(cfg, t);
    trials[t].emplace(t, ts);
    body(*trials[t], t, ts);
  });
  KindOutput out;
  for (auto& t : trials) {
    for (auto& e : t->errors()) {
      out.errors.push_back(std::move(e));
    }
    for (auto& r : t->rows()) {
      out.rows.push_back(std::move(r));
    }
  }
  return out;
}

std::string header_line(const std::string& hash, std::uint64_t seed) {
  return fmt::format("# config_hash={} seed={}\n", hash, seed);
}

KindOutput run_mae_table(const ExperimentConfig& cfg, std::size_t jobs) {
  const DensityModel& p = *cfg.source;
  const DensityModel& q = *cfg.target;
  const double alpha[] = {cfg.gimdre.alpha};
  return per_trial(cfg, jobs, [&](TrialRows& out, std::size_t, std::uint64_t ts) {
    const TrialData data = make_data(cfg, p, q, cfg.n_source, cfg.n_target, ts);
    MethodRunner run(cfg, p, q, data, ts);
    mae_rows(out, run, cfg, alpha, cfg.grid.m, cfg.n_source, dim_of(p), "");
  });
}

KindOutput run_alpha_sweep(const ExperimentConfig& cfg, std::size_t jobs) {
  const std::size_t m[] = {cfg.gimdre.m};
  return per_trial(cfg, jobs, [&](TrialRows& out, std::size_t, std::uint64_t ts) {
    if (cfg.grid.source_mean.empty()) {
      const TrialData data = make_data(cfg, *cfg.source, *cfg.target, cfg.n_source, cfg.n_target, ts);
      MethodRunner run(cfg, *cfg.source, *cfg.target, data, ts);
      mae_rows(out, run, cfg, cfg.grid.alpha, m, cfg.n_source, dim_of(*cfg.source), "");
      return;
    }
    const auto& g = *cfg.source->get_if<GaussianModel>();
    for (const double mu : cfg.grid.source_mean) {
      const DensityModel p = GaussianModel::univariate(mu, g.cov()(0, 0));
      const TrialData data = make_data(cfg, p, *cfg.target, cfg.n_source, cfg.n_target, ts);
      MethodRunner run(cfg, p, *cfg.target, data, ts);
      mae_rows(out, run, cfg, cfg.grid.alpha, m, cfg.n_source, 1, "mu_s=" + detail::format_number(mu));
    }
  });
}

KindOutput run_sample_size_sweep(const ExperimentConfig& cfg, std::size_t jobs) {
  const std::size_t m[] = {cfg.gimdre.m};
  return per_trial(cfg, jobs, [&](TrialRows& out, std::size_t, std::uint64_t ts) {
    for (const std::size_t n : cfg.grid.n) {
      const TrialData data = make_data(cfg, *cfg.source, *cfg.target, n, n, ts);
      MethodRunner run(cfg, *cfg.source, *cfg.target, data, ts);
      mae_rows(out, run, cfg, cfg.grid.alpha, m, n, dim_of(*cfg.source), "");
    }
  });
}

KindOutput run_dimension_sweep(const ExperimentConfig& cfg, std::size_t jobs) {
  const std::size_t m[] = {cfg.gimdre.m};
  const auto& ds = cfg.dimension;
  return per_trial(cfg, jobs, [&](TrialRows& out, std::size_t, std::uint64_t ts) {
    for (const std::size_t d : cfg.grid.d) {
      const auto dd = static_cast<Eigen::Index>(d);
      const DensityModel p = GaussianModel::isotropic(Vector::Constant(dd, ds.source_mean), ds.source_var);
      const DensityModel q = GaussianModel::isotropic(Vector::Constant(dd, ds.target_mean), ds.target_var);
      const TrialData data = make_data(cfg, p, q, cfg.n_source, cfg.n_target, ts);
      MethodRunner run(cfg, p, q, data, ts);
      mae_rows(out, run, cfg, cfg.grid.alpha, m, cfg.n_source, d, "");
    }
  });
}

KindOutput run_ess_sweep(const ExperimentConfig& cfg, std::size_t jobs, const std::string& hash) {
  const DensityModel& p = *cfg.source;
  const DensityModel& q = *cfg.target;
  const std::size_t na = cfg.grid.alpha.size();
  const std::size_t nl = cfg.grid.lambda.size();
  std::vector<std::optional<EssMatrix>> mats(cfg.trials);
  KindOutput out = per_trial(cfg, jobs, [&](TrialRows& rows, std::size_t t, std::uint64_t ts) {
    RatioFn r_hat;
    if (cfg.ess_true_ratio) {
      r_hat = true_ratio(p, q);
    } else {
      DreBaseConfig base = cfg.gimdre.base;
      base.seed = derive_seed(ts, {kDirectSeed});
      const LogisticModel model = fit_direct(sample(p, cfg.n_source, derive_seed(ts, {kSourceDraw})),
                                             sample(q, cfg.n_target, derive_seed(ts, {kTargetDraw})), base);
      r_hat = [model](const PointRef& x) { return ratio_from_classifier(model, x); };
    }
    try {
      mats[t] = ess_sweep(p, q, r_hat, cfg.grid.alpha, cfg.grid.lambda, cfg.n_source, derive_seed(ts, {kEssDraw}),
                          cfg.gimdre.proxy);
    } catch (const Error&) {
    }
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t l = 0; l < nl; ++l) {
        rows.add("ess" + suffix("lambda=" + detail::format_number(cfg.grid.lambda[l])), cfg.grid.alpha[a],
                 std::nullopt, cfg.n_source, dim_of(p), [&] {
                   if (!mats[t]) {
                     throw Error(ErrorKind::numeric_failure, "ESS sweep failed");
                   }
                   return mats[t]->ess(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(l));
                 });
      }
    }
  });

  std::string csv = header_line(hash, cfg.seed) + "alpha,lambda,ess,T\n";
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t l = 0; l < nl; ++l) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& mat : mats) {
        if (mat) {
          sum += mat->ess(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(l));
          ++count;
        }
      }
      csv += fmt::format("{},{},{},{}\n", detail::format_number(cfg.grid.alpha[a]),
                         detail::format_number(cfg.grid.lambda[l]),
                         detail::format_number(count ? sum / static_cast<double>(count) : kNaN), cfg.n_source);
    }
  }
  out.text_files.emplace_back("sweep.csv", std::move(csv));
  return out;
}

KindOutput run_geodesic_trace(const ExperimentConfig& cfg, const std::string& hash) {
  KindOutput out;
  TrialRows rows(0, cfg.seed);
  std::string csv = header_line(hash, cfg.seed) + "alpha,lambda";
  for (std::size_t i = 0; i < cfg.trace_p.size(); ++i) {
    csv += fmt::format(",gamma_{}", i + 1);
  }
  csv += "\n";
  for (const double a : cfg.grid.alpha) {
    for (const double l : cfg.grid.lambda) {
      const GeodesicParams params{a, l, cfg.gimdre.branch};
      csv += detail::format_number(a) + "," + detail::format_number(l);
      for (std::size_t i = 0; i < cfg.trace_p.size(); ++i) {
        // Invalid parameters are the config's fault; let them escape.
        const double g = geodesic_density(cfg.trace_p[i], cfg.trace_q[i], params);
        csv += "," + detail::format_number(g);
        rows.add(fmt::format("gamma_{}[lambda={}]", i + 1, detail::format_number(l)), a, std::nullopt, std::nullopt,
                 std::nullopt, [g] { return g; });
      }
      csv += "\n";
    }
  }
  out.rows = std::move(rows.rows());
  out.errors = std::move(rows.errors());
  out.text_files.emplace_back("trace.csv", std::move(csv));
  return out;
}

KindOutput run_two_sample(const ExperimentConfig& cfg, std::size_t jobs, const std::string& hash) {
  const DensityModel& p = *cfg.source;
  const DensityModel& q = *cfg.target;
  std::vector<std::optional<PermutationTestResult>> results(cfg.trials);
  std::optional<double> alpha;
  if (cfg.test.use_gimdre) {
    alpha = cfg.gimdre.alpha;
  }
  KindOutput out = per_trial(cfg, jobs, [&](TrialRows& rows, std::size_t t, std::uint64_t ts) {
    const Samples xs = sample(p, cfg.n_source, derive_seed(ts, {kSourceDraw}));
    const Samples xt = sample(q, cfg.n_target, derive_seed(ts, {kTargetDraw}));
    TwoSampleFit fit = cfg.gimdre.base;
    if (cfg.test.use_gimdre) {
      GimdreConfig g = cfg.gimdre;
      g.seed = derive_seed(ts, {kGimdreSeed});
      fit = g;
    }
    try {
      results[t] = permutation_test(xs, xt, cfg.test.K, fit, derive_seed(ts, {kShuffleSeed}));
    } catch (const Error&) {
    }
    const auto get = [&](auto f) {
      return [&, f] {
        if (!results[t]) {
          throw Error(ErrorKind::numeric_failure, "permutation test failed");
        }
        return f(*results[t]);
      };
    };
    const std::optional<std::size_t> m =
        cfg.test.use_gimdre ? std::optional<std::size_t>(cell_m(cfg, cfg.gimdre.m)) : std::nullopt;
    const std::size_t d = dim_of(p);
    rows.add("observed", alpha, m, cfg.n_source, d, get([](const PermutationTestResult& r) { return r.observed; }));
    rows.add("p_value", alpha, m, cfg.n_source, d, get([](const PermutationTestResult& r) { return r.p_value; }));
    rows.add("reject" + suffix("level=" + detail::format_number(cfg.test.level)), alpha, m, cfg.n_source, d,
             get([&](const PermutationTestResult& r) { return r.p_value <= cfg.test.level ? 1.0 : 0.0; }));
  });

  json runs = json::array();
  std::size_t rejected = 0;
  std::size_t completed = 0;
  for (std::size_t t = 0; t < results.size(); ++t) {
    if (!results[t]) {
      runs.push_back(nullptr);
      continue;
    }
    ++completed;
    rejected += results[t]->p_value <= cfg.test.level ? 1 : 0;
    json r = to_json(*results[t], hash);
    r["trial"] = t;
    runs.push_back(std::move(r));
  }
  out.json_files.emplace_back(
      "permutation.json",
      json{{"config_hash", hash},
           {"seed", cfg.seed},
           {"level", cfg.test.level},
           {"K", cfg.test.K},
           {"rejection_rate", completed ? json(static_cast<double>(rejected) / static_cast<double>(completed))
                                        : json(nullptr)},
           {"runs", runs}});
  return out;
}

std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg, const RunOptions& options) {
  if (options.out_dir) {
    return *options.out_dir;
  }
  if (cfg.output_dir) {
    return *cfg.output_dir;
  }
  if (const char* env = std::getenv(kOutDirEnv); env && *env) {
    return std::filesystem::path(env) / cfg.name;
  }
  return std::filesystem::path("results") / cfg.name;
}

}  // namespace

RunResult run_experiment(json cfg_json, const RunOptions& options) {
  if (options.seed) {
    cfg_json["seed"] = *options.seed;
  }
  const ExperimentConfig cfg = parse_config(cfg_json);
  const std::string hash = config_hash(cfg_json);
  const std::size_t jobs = std::max<std::size_t>(1, options.jobs);

  KindOutput out;
  switch (cfg.kind) {
    case ExperimentKind::mae_table: out = run_mae_table(cfg, jobs); break;
    case ExperimentKind::alpha_sweep: out = run_alpha_sweep(cfg, jobs); break;
    case ExperimentKind::sample_size_sweep: out = run_sample_size_sweep(cfg, jobs); break;
    case ExperimentKind::dimension_sweep: out = run_dimension_sweep(cfg, jobs); break;
    case ExperimentKind::ess_sweep: out = run_ess_sweep(cfg, jobs, hash); break;
    case ExperimentKind::geodesic_trace: out = run_geodesic_trace(cfg, hash); break;
    case ExperimentKind::two_sample: out = run_two_sample(cfg, jobs, hash); break;
  }

  RunResult res;
  res.out_dir = resolve_out_dir(cfg, options);
  res.config_hash = hash;
  res.seed = cfg.seed;
  res.failed_cells = out.errors.size();
  std::error_code ec;
  std::filesystem::create_directories(res.out_dir, ec);
  if (ec) {
    throw Error(ErrorKind::io_error, "cannot create " + res.out_dir.string() + ": " + ec.message());
  }

  const detail::OutputHeader header{cfg.name, hash, cfg.seed};
  std::vector<std::string> names;
  const auto emit = [&](const std::string& name) {
    names.push_back(name);
    res.files.push_back(res.out_dir / name);
  };
  if (options.format == OutputFormat::json) {
    emit("metrics.json");
    detail::write_metrics_json(res.files.back(), header, out.rows);
  } else {
    emit("metrics.csv");
    detail::write_metrics_csv(res.files.back(), header, out.rows);
  }
  emit("summary.json");
  detail::write_json(res.files.back(), detail::summarize(header, out.rows));
  for (const auto& [name, text] : out.text_files) {
    emit(name);
    detail::write_text(res.files.back(), text);
  }
  for (const auto& [name, value] : out.json_files) {
    emit(name);
    detail::write_json(res.files.back(), value);
  }

  json manifest_cfg = cfg_json;
  manifest_cfg.erase("output_dir");
  std::vector<std::uint64_t> trial_seeds;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    trial_seeds.push_back(trial_seed(cfg, t));
  }
  json manifest{{"config", manifest_cfg},
                {"config_hash", hash},
                {"seed", cfg.seed},
                {"trial_seeds", trial_seeds},
                {"format", options.format == OutputFormat::json ? "json" : "csv"},
                {"files", names},
                {"failures", out.errors}};
  res.manifest = res.out_dir / "manifest.json";
  detail::write_json(res.manifest, manifest);
  return res;
}

}  // namespace gimdre
