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

// gimdre: config-driven experiment runner.
//
//   gimdre run <config|manifest> [--seed N] [--jobs N] [--out-dir DIR] [--format csv|json]
//   gimdre validate <config>
//   gimdre sweep-ess [config]
//   gimdre two-sample [config]
//   gimdre trace-geodesic [config]
//
// Exit codes: 0 success, 1 config error, 2 runtime numeric failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gimdre/error.hpp"
#include "gimdre/experiment.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Common {
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::string out_dir;
  std::string format = "csv";
};

void add_common(CLI::App& app, Common& c) {
  app.add_option("--seed", c.seed, "Replace the config's base seed");
  app.add_option("--jobs", c.jobs, "Trials run in parallel")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", c.out_dir,
                 std::string("Output directory (default: config output_dir, then $") + gimdre::kOutDirEnv +
                     "/<name>, then results/<name>)");
  app.add_option("--format", c.format, "Per-trial metrics format")->check(CLI::IsMember({"csv", "json"}));
}

gimdre::RunOptions options(const Common& c) {
  gimdre::RunOptions o;
  o.seed = c.seed;
  o.jobs = c.jobs;
  if (!c.out_dir.empty()) {
    o.out_dir = c.out_dir;
  }
  o.format = c.format == "json" ? gimdre::OutputFormat::json : gimdre::OutputFormat::csv;
  return o;
}

int report_issues(const std::string& path, const std::vector<gimdre::ConfigIssue>& issues) {
  for (const auto& i : issues) {
    std::cerr << path;
    if (i.line > 0) {
      std::cerr << ":" << i.line;
    }
    std::cerr << ": " << (i.path.empty() ? "/" : i.path) << ": " << i.message << "\n";
  }
  return issues.empty() ? 0 : kExitConfig;
}

int run(const std::string& path, std::optional<gimdre::ExperimentKind> shortcut, const Common& common) {
  nlohmann::json cfg;
  if (path.empty()) {
    cfg = gimdre::default_config(*shortcut);
  } else {
    const auto issues = gimdre::validate_config_file(path);
    if (!issues.empty()) {
      return report_issues(path, issues);
    }
    cfg = gimdre::load_config(path);
    if (shortcut && cfg.value("experiment", "") != gimdre::to_string(*shortcut)) {
      std::cerr << path << ": /experiment: must be \"" << gimdre::to_string(*shortcut)
                << "\" for this subcommand\n";
      return kExitConfig;
    }
  }
  const gimdre::RunResult res = gimdre::run_experiment(cfg, options(common));
  std::cout << "config_hash " << res.config_hash << " seed " << res.seed << "\n";
  for (const auto& f : res.files) {
    std::cout << f.string() << "\n";
  }
  std::cout << res.manifest.string() << "\n";
  if (res.failed_cells > 0) {
    std::cerr << res.failed_cells << " trial metric(s) failed; recorded as nan\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density-ratio estimation along alpha-geodesic bridges"};
  app.require_subcommand(1);

  Common common;
  std::string run_path;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment config or re-run a manifest");
  run_cmd->add_option("config", run_path, "Config or manifest file")->required();
  add_common(*run_cmd, common);

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a config without running it");
  validate_cmd->add_option("config", validate_path, "Config file")->required();

  struct Shortcut {
    const char* name;
    const char* help;
    gimdre::ExperimentKind kind;
    std::string path;
    CLI::App* cmd = nullptr;
  };
  Shortcut shortcuts[] = {
      {"sweep-ess", "ESS over an (alpha, lambda) grid", gimdre::ExperimentKind::ess_sweep, {}},
      {"two-sample", "Permutation two-sample test", gimdre::ExperimentKind::two_sample, {}},
      {"trace-geodesic", "Geodesic values of point pairs along lambda", gimdre::ExperimentKind::geodesic_trace, {}},
  };
  for (auto& s : shortcuts) {
    s.cmd = app.add_subcommand(s.name, s.help);
    s.cmd->add_option("config", s.path, "Config file (built-in default when omitted)");
    add_common(*s.cmd, common);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string* current_path = &run_path;
  try {
    if (*validate_cmd) {
      current_path = &validate_path;
      const auto issues = gimdre::validate_config_file(validate_path);
      if (issues.empty()) {
        std::cout << validate_path << ": ok\n";
      }
      return report_issues(validate_path, issues);
    }
    if (*run_cmd) {
      return run(run_path, std::nullopt, common);
    }
    for (const auto& s : shortcuts) {
      if (*s.cmd) {
        current_path = &s.path;
        return run(s.path, s.kind, common);
      }
    }
  } catch (const gimdre::Error& e) {
    std::cerr << (current_path->empty() ? "gimdre" : *current_path) << ": " << e.what() << "\n";
    const bool config = e.kind() == gimdre::ErrorKind::config_error || e.kind() == gimdre::ErrorKind::io_error;
    return config ? kExitConfig : kExitRuntime;
  }
  return 0;
}
