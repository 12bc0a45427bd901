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

#ifndef GIMDRE_EXPERIMENT_HPP
#define GIMDRE_EXPERIMENT_HPP

// Config-driven experiment runner. The config schema is documented in
// docs/config.md; every kind has an example under configs/.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gimdre/distributions.hpp"
#include "gimdre/gimdre.hpp"
#include "gimdre/imdre.hpp"

namespace gimdre {

enum class ExperimentKind {
  mae_table,
  alpha_sweep,
  dimension_sweep,
  sample_size_sweep,
  ess_sweep,
  geodesic_trace,
  two_sample,
};

[[nodiscard]] std::string_view to_string(ExperimentKind kind) noexcept;
[[nodiscard]] std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) noexcept;

enum class Method { direct, gimdre, imdre };
enum class EvalSet { pooled, source, target };

struct ConfigIssue {
  std::string path;  ///< JSON pointer into the config
  std::string message;
  std::size_t line = 0;  ///< 1-based line in the source file; 0 when unknown
};

/// Empty when the config is valid. Never throws for malformed content.
[[nodiscard]] std::vector<ConfigIssue> validate_config(const nlohmann::json& cfg);

/// Parses a config or manifest file. Unreadable files are io-errors; syntax
/// errors are config-errors carrying line and column. A manifest yields its
/// embedded config after the recorded hash is checked.
[[nodiscard]] nlohmann::json load_config(const std::filesystem::path& path);

/// load_config followed by validate_config; syntax errors become issues.
/// Issues carry the line of the offending (or nearest enclosing) value.
[[nodiscard]] std::vector<ConfigIssue> validate_config_file(const std::filesystem::path& path);

/// 16 hex digits of FNV-1a over the canonical dump, ignoring "output_dir".
[[nodiscard]] std::string config_hash(const nlohmann::json& cfg);

[[nodiscard]] DensityModel parse_model(const nlohmann::json& literal);
[[nodiscard]] nlohmann::json model_to_json(const DensityModel& model);

struct ExperimentGrid {
  std::vector<std::size_t> m;
  std::vector<double> alpha;
  std::vector<std::size_t> n;
  std::vector<std::size_t> d;
  std::vector<double> source_mean;
  std::vector<double> lambda;
};

/// Isotropic Gaussian pair for dimension sweeps: N(mu_s 1, var_s I) vs
/// N(mu_t 1, var_t I).
struct DimensionSpec {
  double source_mean = 1.0;
  double target_mean = 0.0;
  double source_var = 1.0;
  double target_var = 1.0;
};

struct TwoSampleSpec {
  std::size_t K = 100;
  double level = 0.05;
  bool use_gimdre = false;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::mae_table;
  std::string name;
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  std::optional<DensityModel> source;
  std::optional<DensityModel> target;
  std::size_t n_source = 500;
  std::size_t n_target = 500;
  std::vector<Method> methods;
  GimdreConfig gimdre;
  /// IMDRE runs once per listed mode; "both" in the config lists both.
  std::vector<BridgeMode> bridge_modes{BridgeMode::mixture_density};
  EvalSet eval_set = EvalSet::pooled;
  std::size_t n_eval = 500;
  ExperimentGrid grid;
  DimensionSpec dimension;
  std::vector<double> trace_p;
  std::vector<double> trace_q;
  bool ess_true_ratio = true;
  TwoSampleSpec test;
  std::optional<std::string> output_dir;
};

/// Validates, then converts. Throws config-error listing every issue.
[[nodiscard]] ExperimentConfig parse_config(const nlohmann::json& cfg);

enum class OutputFormat { csv, json };

struct RunOptions {
  std::optional<std::uint64_t> seed;  ///< replaces the config seed
  std::size_t jobs = 1;
  std::optional<std::filesystem::path> out_dir;
  OutputFormat format = OutputFormat::csv;
};

struct RunResult {
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::size_t failed_cells = 0;
};

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "GIMDRE_OUT_DIR";

/// Output directory precedence: options.out_dir, the config's output_dir,
/// $GIMDRE_OUT_DIR, then "results".
[[nodiscard]] RunResult run_experiment(nlohmann::json cfg, const RunOptions& options = {});

/// Built-in config used by the shortcut subcommands.
[[nodiscard]] nlohmann::json default_config(ExperimentKind kind);

}  // namespace gimdre

#endif  // GIMDRE_EXPERIMENT_HPP
