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

#ifndef GIMDRE_SRC_EXPERIMENT_OUTPUT_HPP
#define GIMDRE_SRC_EXPERIMENT_OUTPUT_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gimdre/experiment.hpp"

namespace gimdre::detail {

struct MetricRow {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::optional<double> alpha;
  std::optional<std::size_t> m;
  std::optional<std::size_t> n;
  std::optional<std::size_t> d;
  std::string metric_name;
  double metric_value = 0.0;  ///< NaN marks a failed trial
};

/// Every file starts by naming the config hash and base seed.
struct OutputHeader {
  std::string experiment;
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// Shortest round-trip decimal form.
[[nodiscard]] std::string format_number(double x);

void write_metrics_csv(const std::filesystem::path& path, const OutputHeader& header,
                       const std::vector<MetricRow>& rows);
void write_metrics_json(const std::filesystem::path& path, const OutputHeader& header,
                        const std::vector<MetricRow>& rows);

/// Mean and sample std per (metric_name, alpha, m, n, d), in first-seen order.
[[nodiscard]] nlohmann::json summarize(const OutputHeader& header, const std::vector<MetricRow>& rows);

/// Writes `text` verbatim; throws io-error on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

}  // namespace gimdre::detail

#endif  // GIMDRE_SRC_EXPERIMENT_OUTPUT_HPP
