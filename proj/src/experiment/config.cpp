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
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <map>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "gimdre/error.hpp"
#include "gimdre/experiment.hpp"

namespace gimdre {
namespace {

using nlohmann::json;

class Validator {
 public:
  std::vector<ConfigIssue> issues;

  void add(std::string path, std::string message) { issues.push_back({std::move(path), std::move(message)}); }

  static std::string child(const std::string& path, std::string_view key) {
    std::string out = path + "/";
    for (const char c : key) {
      if (c == '~') {
        out += "~0";
      } else if (c == '/') {
        out += "~1";
      } else {
        out += c;
      }
    }
    return out;
  }
  static std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

  const json* get(const json& obj, const std::string& path, std::string_view key, bool required) {
    if (!obj.is_object()) {
      return nullptr;
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) {
        add(child(path, key), "is required");
      }
      return nullptr;
    }
    return &*it;
  }

  bool object(const json& v, const std::string& path) {
    if (!v.is_object()) {
      add(path, "must be an object");
      return false;
    }
    return true;
  }

  void known_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) {
      return;
    }
    for (const auto& [k, v] : obj.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        add(child(path, k), "unknown key");
      }
    }
  }

  std::optional<double> number(const json& v, const std::string& path,
                               const std::function<bool(double)>& ok = nullptr, std::string_view constraint = "") {
    if (!v.is_number()) {
      add(path, "must be a number");
      return std::nullopt;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
      add(path, "must be finite");
      return std::nullopt;
    }
    if (ok && !ok(x)) {
      add(path, std::string(constraint));
      return std::nullopt;
    }
    return x;
  }

  std::optional<std::uint64_t> integer(const json& v, const std::string& path, std::uint64_t min) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      add(path, v.is_number_integer() ? fmt::format("must be an integer >= {}", min) : "must be an integer");
      return std::nullopt;
    }
    const auto x = v.get<std::uint64_t>();
    if (x < min) {
      add(path, fmt::format("must be an integer >= {}", min));
      return std::nullopt;
    }
    return x;
  }

  std::optional<std::string> choice(const json& v, const std::string& path,
                                    std::initializer_list<std::string_view> allowed) {
    if (!v.is_string()) {
      add(path, "must be a string");
      return std::nullopt;
    }
    const auto s = v.get<std::string>();
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto a : allowed) {
        list += (list.empty() ? "" : ", ") + std::string(a);
      }
      add(path, fmt::format("must be one of {{{}}}, got \"{}\"", list, s));
      return std::nullopt;
    }
    return s;
  }

  template <class F>
  void array(const json& v, const std::string& path, bool nonempty, F&& each) {
    if (!v.is_array()) {
      add(path, "must be an array");
      return;
    }
    if (nonempty && v.empty()) {
      add(path, "must not be empty");
      return;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      each(v[i], child(path, i));
    }
  }

  void model(const json& v, const std::string& path) {
    if (!object(v, path)) {
      return;
    }
    const json* kind = get(v, path, "kind", true);
    if (!kind) {
      return;
    }
    const auto k = choice(*kind, child(path, "kind"), {"gaussian", "lognormal", "powerlaw"});
    if (!k) {
      return;
    }
    if (*k == "gaussian") {
      known_keys(v, path, {"kind", "mean", "cov"});
      const json* mean = get(v, path, "mean", true);
      const json* cov = get(v, path, "cov", true);
      std::size_t d = 0;
      bool ok = mean && cov;
      if (mean) {
        const auto before = issues.size();
        array(*mean, child(path, "mean"), true, [&](const json& x, const std::string& p) { number(x, p); });
        ok = ok && issues.size() == before;
        d = mean->is_array() ? mean->size() : 0;
      }
      if (cov) {
        const auto before = issues.size();
        const std::string cp = child(path, "cov");
        array(*cov, cp, true, [&](const json& r, const std::string& p) {
          if (r.is_array() && r.size() != d) {
            add(p, fmt::format("covariance rows must have {} entries to match the mean", d));
            return;
          }
          array(r, p, true, [&](const json& x, const std::string& q) { number(x, q); });
        });
        if (cov->is_array() && cov->size() != d && issues.size() == before) {
          add(cp, fmt::format("covariance must be {0}x{0} to match the mean", d));
        }
        ok = ok && issues.size() == before;
      }
      if (ok) {
        try {
          (void)parse_model(v);
        } catch (const Error& e) {
          add(child(path, "cov"), e.what());
        }
      }
    } else if (*k == "lognormal") {
      known_keys(v, path, {"kind", "mu", "sigma"});
      if (const json* mu = get(v, path, "mu", true)) {
        number(*mu, child(path, "mu"));
      }
      if (const json* s = get(v, path, "sigma", true)) {
        number(*s, child(path, "sigma"), [](double x) { return x > 0.0; }, "must be > 0");
      }
    } else {
      known_keys(v, path, {"kind", "a"});
      if (const json* a = get(v, path, "a", true)) {
        number(*a, child(path, "a"), [](double x) { return x > 0.0; }, "must be > 0");
      }
    }
  }
};

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return fmt::format("{}:{}", line, col);
}

// Maps JSON pointers to the line where their value (or key) starts. Assumes
// text that already parsed.
class LineLocator {
 public:
  explicit LineLocator(const std::string& text) : text_(text) {
    skip();
    value("");
  }

  // Nearest enclosing pointer wins for paths that do not exist.
  std::size_t line(std::string pointer) const {
    while (true) {
      if (const auto it = lines_.find(pointer); it != lines_.end()) {
        return it->second;
      }
      if (pointer.empty()) {
        return 0;
      }
      pointer.erase(pointer.rfind('/'));
    }
  }

 private:
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      line_ += text_[pos_] == '\n' ? 1 : 0;
      ++pos_;
    }
  }

  std::string string() {
    std::string out;
    ++pos_;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\') {
        ++pos_;
      }
      out += text_[pos_++];
    }
    ++pos_;
    return out;
  }

  void value(const std::string& pointer) {
    lines_.emplace(pointer, line_);
    if (pos_ >= text_.size()) {
      return;
    }
    const char c = text_[pos_];
    if (c == '{') {
      ++pos_;
      skip();
      while (pos_ < text_.size() && text_[pos_] != '}') {
        const std::size_t key_line = line_;
        const std::string key = string();
        const std::string child = Validator::child(pointer, key);
        skip();
        ++pos_;  // ':'
        skip();
        lines_.emplace(child, key_line);
        value(child);
        skip();
        if (text_[pos_] == ',') {
          ++pos_;
          skip();
        }
      }
      ++pos_;
    } else if (c == '[') {
      ++pos_;
      skip();
      for (std::size_t i = 0; pos_ < text_.size() && text_[pos_] != ']'; ++i) {
        value(Validator::child(pointer, i));
        skip();
        if (text_[pos_] == ',') {
          ++pos_;
          skip();
        }
      }
      ++pos_;
    } else if (c == '"') {
      string();
    } else {
      while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '}' && text_[pos_] != ']' &&
             !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::map<std::string, std::size_t> lines_;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::io_error, "cannot read " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool is_manifest(const json& j) { return j.is_object() && j.contains("config") && j.contains("config_hash"); }

bool needs_source_target(ExperimentKind k) {
  return k != ExperimentKind::dimension_sweep && k != ExperimentKind::geodesic_trace;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::mae_table: return "mae_table";
    case ExperimentKind::alpha_sweep: return "alpha_sweep";
    case ExperimentKind::dimension_sweep: return "dimension_sweep";
    case ExperimentKind::sample_size_sweep: return "sample_size_sweep";
    case ExperimentKind::ess_sweep: return "ess_sweep";
    case ExperimentKind::geodesic_trace: return "geodesic_trace";
    case ExperimentKind::two_sample: return "two_sample";
  }
  return "mae_table";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) noexcept {
  for (const auto k : {ExperimentKind::mae_table, ExperimentKind::alpha_sweep, ExperimentKind::dimension_sweep,
                       ExperimentKind::sample_size_sweep, ExperimentKind::ess_sweep, ExperimentKind::geodesic_trace,
                       ExperimentKind::two_sample}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  return std::nullopt;
}

DensityModel parse_model(const json& literal) {
  const auto kind = literal.at("kind").get<std::string>();
  if (kind == "gaussian") {
    const auto mean = literal.at("mean").get<std::vector<double>>();
    const auto cov = literal.at("cov").get<std::vector<std::vector<double>>>();
    const auto d = static_cast<Eigen::Index>(mean.size());
    Vector mu = Eigen::Map<const Vector>(mean.data(), d);
    Eigen::MatrixXd c(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (cov.at(static_cast<std::size_t>(i)).size() != mean.size()) {
        throw Error(ErrorKind::config_error, "covariance shape does not match the mean");
      }
      for (Eigen::Index j = 0; j < d; ++j) {
        c(i, j) = cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
    }
    if (static_cast<Eigen::Index>(cov.size()) != d) {
      throw Error(ErrorKind::config_error, "covariance shape does not match the mean");
    }
    return GaussianModel(std::move(mu), std::move(c));
  }
  if (kind == "lognormal") {
    return LogNormalModel{literal.at("mu").get<double>(), literal.at("sigma").get<double>()};
  }
  if (kind == "powerlaw") {
    return PowerLawModel{literal.at("a").get<double>()};
  }
  throw Error(ErrorKind::config_error, "unknown model kind \"" + kind + "\"");
}

json model_to_json(const DensityModel& model) {
  if (const auto* g = model.get_if<GaussianModel>()) {
    std::vector<std::vector<double>> cov(g->dim(), std::vector<double>(g->dim()));
    for (std::size_t i = 0; i < g->dim(); ++i) {
      for (std::size_t j = 0; j < g->dim(); ++j) {
        cov[i][j] = g->cov()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
    return {{"kind", "gaussian"}, {"mean", std::vector<double>(g->mean().begin(), g->mean().end())}, {"cov", cov}};
  }
  if (const auto* l = model.get_if<LogNormalModel>()) {
    return {{"kind", "lognormal"}, {"mu", l->mu}, {"sigma", l->sigma}};
  }
  if (const auto* p = model.get_if<PowerLawModel>()) {
    return {{"kind", "powerlaw"}, {"a", p->a}};
  }
  throw Error(ErrorKind::unsupported_model, "geodesic densities have no config literal");
}

std::vector<ConfigIssue> validate_config(const json& cfg) {
  Validator v;
  const std::string root;
  if (!cfg.is_object()) {
    v.add("", "config must be a JSON object");
    return v.issues;
  }
  v.known_keys(cfg, root,
               {
            "experiment", "name",   "trials",     "seed",  "output_dir", "source", "target", "n",          "n_source",
            "n_target",   "methods", "base",      "gimdre", "imdre",     "evaluation", "grid", "dimension", "points",
            "ess",        "test"});

  std::optional<ExperimentKind> kind;
  if (const json* e = v.get(cfg, root, "experiment", true)) {
    if (e->is_string()) {
      kind = parse_experiment_kind(e->get<std::string>());
    }
    if (!kind) {
      v.choice(*e, "/experiment",
               {"mae_table", "alpha_sweep", "dimension_sweep", "sample_size_sweep", "ess_sweep", "geodesic_trace",
                "two_sample"});
    }
  }
  if (const json* name = v.get(cfg, root, "name", false)) {
    const bool ok = name->is_string() && !name->get<std::string>().empty() &&
                    std::all_of(name->get_ref<const std::string&>().begin(), name->get_ref<const std::string&>().end(),
                                [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
                                                    c == '-' || c == '.'; });
    if (!ok) {
      v.add("/name", "must be a non-empty string of letters, digits, '_', '-' or '.'");
    }
  }
  if (const json* t = v.get(cfg, root, "trials", false)) {
    v.integer(*t, "/trials", 1);
  }
  if (const json* s = v.get(cfg, root, "seed", false)) {
    v.integer(*s, "/seed", 0);
  }
  if (const json* o = v.get(cfg, root, "output_dir", false); o && !o->is_string()) {
    v.add("/output_dir", "must be a string");
  }

  const bool st = kind && needs_source_target(*kind);
  for (const char* key : {"source", "target"}) {
    if (const json* m = v.get(cfg, root, key, st)) {
      v.model(*m, Validator::child(root, key));
    }
  }
  for (const char* key : {"n", "n_source", "n_target"}) {
    if (const json* n = v.get(cfg, root, key, false)) {
      v.integer(*n, Validator::child(root, key), 2);
    }
  }
  if (kind == ExperimentKind::two_sample && (cfg.contains("n_source") || cfg.contains("n_target"))) {
    const auto ns = cfg.value("n_source", cfg.value("n", 500));
    const auto nt = cfg.value("n_target", cfg.value("n", 500));
    if (ns != nt) {
      v.add("/n_target", "the permutation test requires n_source = n_target");
    }
  }

  if (const json* methods = v.get(cfg, root, "methods", false)) {
    v.array(*methods, "/methods", true,
            [&](const json& x, const std::string& p) { v.choice(x, p, {"direct", "gimdre", "imdre"}); });
  }

  bool power_branch = false;
  if (const json* base = v.get(cfg, root, "base", false); base && v.object(*base, "/base")) {
    v.known_keys(*base, "/base", {"kernel", "reg", "tolerance", "max_iterations", "max_centers", "normalization"});
    if (const json* k = v.get(*base, "/base", "kernel", false); k && v.object(*k, "/base/kernel")) {
      v.known_keys(*k, "/base/kernel", {"kind", "c"});
      if (const json* kk = v.get(*k, "/base/kernel", "kind", true)) {
        v.choice(*kk, "/base/kernel/kind", {"linear", "polynomial", "cubic_spline"});
      }
      if (const json* c = v.get(*k, "/base/kernel", "c", false)) {
        v.number(*c, "/base/kernel/c");
      }
    }
    if (const json* r = v.get(*base, "/base", "reg", false)) {
      v.number(*r, "/base/reg", [](double x) { return x > 0.0; }, "must be > 0");
    }
    if (const json* t = v.get(*base, "/base", "tolerance", false)) {
      v.number(*t, "/base/tolerance", [](double x) { return x > 0.0; }, "must be > 0");
    }
    if (const json* it = v.get(*base, "/base", "max_iterations", false)) {
      v.integer(*it, "/base/max_iterations", 1);
    }
    if (const json* mc = v.get(*base, "/base", "max_centers", false)) {
      v.integer(*mc, "/base/max_centers", 1);
    }
    if (const json* nm = v.get(*base, "/base", "normalization", false)) {
      v.choice(*nm, "/base/normalization", {"per_class", "none"});
    }
  }

  std::optional<double> alpha;
  if (const json* g = v.get(cfg, root, "gimdre", false); g && v.object(*g, "/gimdre")) {
    v.known_keys(*g, "/gimdre", {"alpha", "m", "outer_iters", "proxy", "schedule", "clip", "branch", "min_bridge_ess"});
    if (const json* e = v.get(*g, "/gimdre", "min_bridge_ess", false)) {
      v.number(*e, "/gimdre/min_bridge_ess", [](double x) { return x >= 0.0; }, "must be >= 0");
    }
    if (const json* a = v.get(*g, "/gimdre", "alpha", false)) {
      alpha = v.number(*a, "/gimdre/alpha");
    }
    if (const json* m = v.get(*g, "/gimdre", "m", false)) {
      v.integer(*m, "/gimdre/m", 1);
    }
    if (const json* o = v.get(*g, "/gimdre", "outer_iters", false)) {
      v.integer(*o, "/gimdre/outer_iters", 1);
    }
    if (const json* p = v.get(*g, "/gimdre", "proxy", false)) {
      v.choice(*p, "/gimdre/proxy", {"source", "target"});
    }
    if (const json* s = v.get(*g, "/gimdre", "schedule", false)) {
      if (s->is_string()) {
        const auto mode = v.choice(*s, "/gimdre/schedule", {"uniform", "arc_length", "telescoping_sqrt"});
        if (mode == "arc_length" && kind == ExperimentKind::dimension_sweep) {
          v.add("/gimdre/schedule", "arc_length schedules are univariate; dimension sweeps need uniform");
        }
      } else if (s->is_object()) {
        v.known_keys(*s, "/gimdre/schedule", {"lambdas"});
        if (const json* ls = v.get(*s, "/gimdre/schedule", "lambdas", true)) {
          double prev = 0.0;
          v.array(*ls, "/gimdre/schedule/lambdas", true, [&](const json& x, const std::string& p) {
            const auto l = v.number(x, p, [](double y) { return y >= 0.0 && y <= 1.0; }, "must lie in [0,1]");
            if (!l) {
              return;
            }
            if (*l == 0.0 || *l == 1.0) {
              v.add(p, "bridge lambdas must be strictly inside (0,1); the endpoints 0 and 1 are implicit");
            } else if (*l < prev) {
              v.add(p, "bridge lambdas must be non-decreasing");
            }
            prev = *l;
          });
        }
      } else {
        v.add("/gimdre/schedule", "must be a schedule name or an object with \"lambdas\"");
      }
    }
    if (const json* c = v.get(*g, "/gimdre", "clip", false)) {
      if (!c->is_array() || c->size() != 2) {
        v.add("/gimdre/clip", "must be a [low, high] pair");
      } else {
        const auto lo = v.number((*c)[0], "/gimdre/clip/0", [](double x) { return x > 0.0; }, "must be > 0");
        const auto hi = v.number((*c)[1], "/gimdre/clip/1", [](double x) { return x > 0.0; }, "must be > 0");
        if (lo && hi && !(*hi > *lo)) {
          v.add("/gimdre/clip", "bounds must be ordered low < high");
        }
      }
    }
    if (const json* b = v.get(*g, "/gimdre", "branch", false)) {
      power_branch = v.choice(*b, "/gimdre/branch", {"auto", "power", "exponential"}) == "power";
      if (power_branch && alpha == 1.0) {
        v.add("/gimdre/branch",
              "alpha = 1 is singular for the power branch; use \"exponential\" (or \"auto\") for the e-geodesic");
      }
      if (v.choice(*b, "/gimdre/branch", {"auto", "power", "exponential"}) == "exponential" && alpha &&
          std::abs(*alpha - 1.0) >= kAlphaOneTolerance) {
        v.add("/gimdre/branch", "the exponential branch requires alpha = 1");
      }
    }
  }

  if (const json* im = v.get(cfg, root, "imdre", false); im && v.object(*im, "/imdre")) {
    v.known_keys(*im, "/imdre", {"bridge_mode"});
    if (const json* b = v.get(*im, "/imdre", "bridge_mode", false)) {
      v.choice(*b, "/imdre/bridge_mode", {"mixture_density", "point_interpolation", "both"});
    }
  }
  if (const json* ev = v.get(cfg, root, "evaluation", false); ev && v.object(*ev, "/evaluation")) {
    v.known_keys(*ev, "/evaluation", {"set", "n_eval"});
    if (const json* s = v.get(*ev, "/evaluation", "set", false)) {
      v.choice(*s, "/evaluation/set", {"pooled", "source", "target"});
    }
    if (const json* n = v.get(*ev, "/evaluation", "n_eval", false)) {
      v.integer(*n, "/evaluation/n_eval", 1);
    }
  }

  // Grid requirements per kind.
  const json* grid = v.get(cfg, root, "grid", false);
  if (grid) {
    v.object(*grid, "/grid");
    v.known_keys(*grid, "/grid", {"m", "alpha", "n", "d", "source_mean", "lambda"});
  }
  const auto need = [&](std::string_view key) {
    const json* g = grid && grid->is_object() ? v.get(*grid, "/grid", key, true) : nullptr;
    if (!grid || !grid->is_object()) {
      v.add(Validator::child("/grid", key), "is required for this experiment kind");
    }
    return g;
  };
  const auto ints = [&](const json* g, std::string_view key, std::uint64_t min) {
    if (g) {
      v.array(*g, Validator::child("/grid", key), true,
              [&](const json& x, const std::string& p) { v.integer(x, p, min); });
    }
  };
  const auto alphas = [&](const json* g) {
    if (!g) {
      return;
    }
    v.array(*g, "/grid/alpha", true, [&](const json& x, const std::string& p) {
      const auto a = v.number(x, p);
      if (a && power_branch && *a == 1.0) {
        v.add(p, "alpha = 1 is singular for the power branch; use \"exponential\" (or \"auto\") for the e-geodesic");
      }
    });
  };
  const auto lambdas = [&](const json* g) {
    if (g) {
      v.array(*g, "/grid/lambda", true, [&](const json& x, const std::string& p) {
        v.number(x, p, [](double y) { return y >= 0.0 && y <= 1.0; }, "must lie in [0,1]");
      });
    }
  };
  if (kind) {
    switch (*kind) {
      case ExperimentKind::mae_table: ints(need("m"), "m", 1); break;
      case ExperimentKind::alpha_sweep:
        alphas(need("alpha"));
        if (const json* sm = grid && grid->is_object() ? v.get(*grid, "/grid", "source_mean", false) : nullptr) {
          v.array(*sm, "/grid/source_mean", true, [&](const json& x, const std::string& p) { v.number(x, p); });
          const json* src = cfg.contains("source") ? &cfg["source"] : nullptr;
          if (src && src->is_object() && src->value("kind", "") == "gaussian" && src->contains("mean") &&
              (*src)["mean"].is_array() && (*src)["mean"].size() != 1) {
            v.add("/grid/source_mean", "mean shifts need a univariate Gaussian source");
          } else if (src && src->is_object() && src->value("kind", "") != "gaussian") {
            v.add("/grid/source_mean", "mean shifts need a univariate Gaussian source");
          }
        }
        break;
      case ExperimentKind::sample_size_sweep:
        ints(need("n"), "n", 2);
        alphas(need("alpha"));
        break;
      case ExperimentKind::dimension_sweep:
        ints(need("d"), "d", 1);
        alphas(need("alpha"));
        if (const json* dim = v.get(cfg, root, "dimension", false); dim && v.object(*dim, "/dimension")) {
          v.known_keys(*dim, "/dimension", {"source_mean", "target_mean", "source_var", "target_var"});
          for (const char* key : {"source_mean", "target_mean"}) {
            if (const json* x = v.get(*dim, "/dimension", key, false)) {
              v.number(*x, Validator::child("/dimension", key));
            }
          }
          for (const char* key : {"source_var", "target_var"}) {
            if (const json* x = v.get(*dim, "/dimension", key, false)) {
              v.number(*x, Validator::child("/dimension", key), [](double y) { return y > 0.0; }, "must be > 0");
            }
          }
        }
        break;
      case ExperimentKind::ess_sweep:
        alphas(need("alpha"));
        lambdas(need("lambda"));
        if (const json* e = v.get(cfg, root, "ess", false); e && v.object(*e, "/ess")) {
          v.known_keys(*e, "/ess", {"ratio"});
          if (const json* r = v.get(*e, "/ess", "ratio", false)) {
            v.choice(*r, "/ess/ratio", {"true", "direct"});
          }
        }
        break;
      case ExperimentKind::geodesic_trace: {
        alphas(need("alpha"));
        lambdas(need("lambda"));
        const json* pts = v.get(cfg, root, "points", true);
        if (pts && v.object(*pts, "/points")) {
          v.known_keys(*pts, "/points", {"p", "q"});
          std::size_t sizes[2] = {0, 0};
          int idx = 0;
          for (const char* key : {"p", "q"}) {
            if (const json* a = v.get(*pts, "/points", key, true)) {
              v.array(*a, Validator::child("/points", key), true, [&](const json& x, const std::string& p) {
                v.number(x, p, [](double y) { return y > 0.0; }, "density values must be > 0");
              });
              sizes[idx] = a->is_array() ? a->size() : 0;
            }
            ++idx;
          }
          if (sizes[0] != sizes[1]) {
            v.add("/points/q", "must have as many entries as /points/p");
          }
        }
        break;
      }
      case ExperimentKind::two_sample:
        if (const json* t = v.get(cfg, root, "test", false); t && v.object(*t, "/test")) {
          v.known_keys(*t, "/test", {"K", "level", "fit"});
          if (const json* k = v.get(*t, "/test", "K", false)) {
            v.integer(*k, "/test/K", 1);
          }
          if (const json* l = v.get(*t, "/test", "level", false)) {
            v.number(*l, "/test/level", [](double y) { return y > 0.0 && y < 1.0; }, "must lie in (0,1)");
          }
          if (const json* f = v.get(*t, "/test", "fit", false)) {
            v.choice(*f, "/test/fit", {"direct", "gimdre"});
          }
        }
        break;
    }
  }
  return v.issues;
}

json load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json cfg;
  try {
    cfg = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config_error, fmt::format("{}:{}: {}", path.string(), line_col(text, e.byte), e.what()));
  }
  if (is_manifest(cfg)) {
    json inner = cfg["config"];
    if (!cfg["config_hash"].is_string() || config_hash(inner) != cfg["config_hash"].get<std::string>()) {
      throw Error(ErrorKind::config_error, path.string() + ": manifest hash does not match its config");
    }
    return inner;
  }
  return cfg;
}

std::vector<ConfigIssue> validate_config_file(const std::filesystem::path& path) {
  {
    const std::string text = read_file(path);
    try {
      [[maybe_unused]] const json probe = json::parse(text);
    } catch (const json::parse_error& e) {
      const std::size_t end = std::min<std::size_t>(e.byte, text.size());
      const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + end, '\n')) + 1;
      return {{"", e.what(), line}};
    }
  }
  json cfg;
  try {
    cfg = load_config(path);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io_error) {
      throw;
    }
    return {{"", e.what()}};
  }
  auto issues = validate_config(cfg);
  if (!issues.empty()) {
    const std::string text = read_file(path);
    const LineLocator locator(text);
    const std::string prefix = is_manifest(json::parse(text)) ? "/config" : "";
    for (auto& i : issues) {
      i.line = locator.line(prefix + i.path);
    }
  }
  return issues;
}

std::string config_hash(const json& cfg) {
  json copy = cfg;
  if (copy.is_object()) {
    copy.erase("output_dir");
  }
  const std::string text = copy.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

ExperimentConfig parse_config(const json& cfg) {
  const auto issues = validate_config(cfg);
  if (!issues.empty()) {
    std::string msg = "invalid config:";
    for (const auto& i : issues) {
      msg += "\n  " + (i.path.empty() ? std::string("/") : i.path) + ": " + i.message;
    }
    throw Error(ErrorKind::config_error, msg);
  }
  ExperimentConfig out;
  out.kind = *parse_experiment_kind(cfg.at("experiment").get<std::string>());
  out.name = cfg.value("name", std::string(to_string(out.kind)));
  out.trials = cfg.value("trials", std::size_t{10});
  out.seed = cfg.value("seed", std::uint64_t{0});
  if (cfg.contains("output_dir")) {
    out.output_dir = cfg["output_dir"].get<std::string>();
  }
  if (cfg.contains("source")) {
    out.source = parse_model(cfg["source"]);
  }
  if (cfg.contains("target")) {
    out.target = parse_model(cfg["target"]);
  }
  const std::size_t n = cfg.value("n", std::size_t{500});
  out.n_source = cfg.value("n_source", n);
  out.n_target = cfg.value("n_target", n);

  const std::vector<std::string> default_methods =
      out.kind == ExperimentKind::mae_table ? std::vector<std::string>{"direct", "gimdre", "imdre"}
                                            : std::vector<std::string>{"gimdre"};
  for (const auto& m : cfg.value("methods", default_methods)) {
    out.methods.push_back(m == "direct" ? Method::direct : m == "imdre" ? Method::imdre : Method::gimdre);
  }

  const json base = cfg.value("base", json::object());
  auto& b = out.gimdre.base;
  if (base.contains("kernel")) {
    const auto& k = base["kernel"];
    const auto kk = k.at("kind").get<std::string>();
    if (kk == "polynomial") {
      b.kernel = PolynomialKernel{k.value("c", 1.0)};
    } else if (kk == "cubic_spline") {
      b.kernel = CubicSplineKernel{};
    } else {
      b.kernel = LinearKernel{};
    }
  }
  b.reg = base.value("reg", b.reg);
  b.optimizer.tolerance = base.value("tolerance", b.optimizer.tolerance);
  b.optimizer.max_iterations = base.value("max_iterations", b.optimizer.max_iterations);
  b.max_centers = base.value("max_centers", b.max_centers);
  b.normalization = base.value("normalization", std::string("per_class")) == "none" ? WeightNormalization::none
                                                                                     : WeightNormalization::per_class;

  const json g = cfg.value("gimdre", json::object());
  auto& gc = out.gimdre;
  gc.alpha = g.value("alpha", gc.alpha);
  gc.m = g.value("m", gc.m);
  gc.outer_iters = g.value("outer_iters", gc.outer_iters);
  gc.proxy = g.value("proxy", std::string("source")) == "target" ? Proxy::target : Proxy::source;
  if (g.contains("schedule")) {
    if (g["schedule"].is_string()) {
      gc.schedule_mode = *parse_schedule_mode(g["schedule"].get<std::string>());
    } else {
      gc.schedule_mode = ScheduleMode::explicit_list;
      gc.lambdas = g["schedule"]["lambdas"].get<std::vector<double>>();
      gc.m = gc.lambdas.size();
    }
  }
  if (g.contains("clip")) {
    gc.clip_low = g["clip"][0].get<double>();
    gc.clip_high = g["clip"][1].get<double>();
  }
  gc.min_bridge_ess = g.value("min_bridge_ess", gc.min_bridge_ess);
  const auto branch = g.value("branch", std::string("auto"));
  gc.branch = branch == "power"         ? GeodesicBranch::power
              : branch == "exponential" ? GeodesicBranch::exponential
                                        : GeodesicBranch::automatic;

  const json im = cfg.value("imdre", json::object());
  const auto bm = im.value("bridge_mode", std::string("mixture_density"));
  if (bm == "both") {
    out.bridge_modes = {BridgeMode::mixture_density, BridgeMode::point_interpolation};
  } else {
    out.bridge_modes = {*parse_bridge_mode(bm)};
  }

  const json ev = cfg.value("evaluation", json::object());
  const auto set = ev.value("set", std::string("pooled"));
  out.eval_set = set == "source" ? EvalSet::source : set == "target" ? EvalSet::target : EvalSet::pooled;
  out.n_eval = ev.value("n_eval", out.n_eval);

  const json grid = cfg.value("grid", json::object());
  out.grid.m = grid.value("m", std::vector<std::size_t>{});
  out.grid.alpha = grid.value("alpha", std::vector<double>{});
  out.grid.n = grid.value("n", std::vector<std::size_t>{});
  out.grid.d = grid.value("d", std::vector<std::size_t>{});
  out.grid.source_mean = grid.value("source_mean", std::vector<double>{});
  out.grid.lambda = grid.value("lambda", std::vector<double>{});

  const json dim = cfg.value("dimension", json::object());
  out.dimension.source_mean = dim.value("source_mean", out.dimension.source_mean);
  out.dimension.target_mean = dim.value("target_mean", out.dimension.target_mean);
  out.dimension.source_var = dim.value("source_var", out.dimension.source_var);
  out.dimension.target_var = dim.value("target_var", out.dimension.target_var);

  if (cfg.contains("points")) {
    out.trace_p = cfg["points"]["p"].get<std::vector<double>>();
    out.trace_q = cfg["points"]["q"].get<std::vector<double>>();
  }
  out.ess_true_ratio = cfg.value("ess", json::object()).value("ratio", std::string("true")) == "true";

  const json t = cfg.value("test", json::object());
  out.test.K = t.value("K", out.test.K);
  out.test.level = t.value("level", out.test.level);
  out.test.use_gimdre = t.value("fit", std::string("direct")) == "gimdre";
  return out;
}

json default_config(ExperimentKind kind) {
  const json gauss_s = {{"kind", "gaussian"}, {"mean", {8.0}}, {"cov", {{3.0}}}};
  const json gauss_t = {{"kind", "gaussian"}, {"mean", {0.0}}, {"cov", {{2.0}}}};
  switch (kind) {
    case ExperimentKind::ess_sweep:
      return {{"experiment", "ess_sweep"},
              {"name", "ess_sweep"},
              {"trials", 10},
              {"seed", 1},
              {"source", gauss_s},
              {"target", gauss_t},
              {"n", 500},
              {"grid",
               {{"alpha", {-1.0, 0.0, 1.0, 3.0, 5.0, 7.0}},
                {"lambda", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}}}}};
    case ExperimentKind::geodesic_trace:
      return {{"experiment", "geodesic_trace"},
              {"name", "geodesic_trace"},
              {"trials", 1},
              {"seed", 0},
              {"points", {{"p", {0.1, 0.1}}, {"q", {0.9, 0.9}}}},
              {"grid",
               {{"alpha", {-1.0, 3.0}}, {"lambda", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}}}}};
    case ExperimentKind::two_sample:
      return {{"experiment", "two_sample"},
              {"name", "two_sample"},
              {"trials", 100},
              {"seed", 2},
              {"source", {{"kind", "gaussian"}, {"mean", {0.0}}, {"cov", {{1.0}}}}},
              {"target", {{"kind", "gaussian"}, {"mean", {1.0}}, {"cov", {{1.0}}}}},
              {"n", 500},
              {"test", {{"K", 100}, {"level", 0.05}, {"fit", "direct"}}}};
    default:
      return {{"experiment", std::string(to_string(kind))},
              {"source", gauss_s},
              {"target", gauss_t},
              {"n", 500},
              {"grid", {{"m", {10, 50, 100}}}}};
  }
}

}  // namespace gimdre
