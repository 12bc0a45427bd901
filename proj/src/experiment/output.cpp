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

#include "experiment/output.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include <fmt/format.h>

#include "gimdre/error.hpp"

namespace gimdre::detail {
namespace {

using nlohmann::json;

template <class T>
std::string field(const std::optional<T>& v) {
  if (!v) {
    return "";
  }
  if constexpr (std::is_floating_point_v<T>) {
    return format_number(*v);
  } else {
    return fmt::format("{}", *v);
  }
}

template <class T>
json or_null(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) {
    return "nan";
  }
  return fmt::format("{}", x);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::io_error, "cannot write " + path.string());
  }
  out << text;
  if (!out) {
    throw Error(ErrorKind::io_error, "write failed for " + path.string());
  }
}

void write_json(const std::filesystem::path& path, const json& value) { write_text(path, value.dump(2) + "\n"); }

void write_metrics_csv(const std::filesystem::path& path, const OutputHeader& header,
                       const std::vector<MetricRow>& rows) {
  std::string text = fmt::format("# config_hash={} seed={}\n", header.config_hash, header.seed);
  text += "experiment,trial,seed,alpha,m,n,d,metric_name,metric_value\n";
  for (const auto& r : rows) {
    // Metric names may carry commas inside brackets; quote them.
    const bool quote = r.metric_name.find(',') != std::string::npos;
    text += fmt::format("{},{},{},{},{},{},{},{}{}{},{}\n", header.experiment, r.trial, r.seed, field(r.alpha),
                        field(r.m), field(r.n), field(r.d), quote ? "\"" : "", r.metric_name, quote ? "\"" : "",
                        format_number(r.metric_value));
  }
  write_text(path, text);
}

void write_metrics_json(const std::filesystem::path& path, const OutputHeader& header,
                        const std::vector<MetricRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"experiment", header.experiment},
                   {"trial", r.trial},
                   {"seed", r.seed},
                   {"alpha", or_null(r.alpha)},
                   {"m", or_null(r.m)},
                   {"n", or_null(r.n)},
                   {"d", or_null(r.d)},
                   {"metric_name", r.metric_name},
                   {"metric_value", number_or_null(r.metric_value)}});
  }
  write_json(path, {{"config_hash", header.config_hash}, {"seed", header.seed}, {"rows", arr}});
}

json summarize(const OutputHeader& header, const std::vector<MetricRow>& rows) {
  using Key = std::tuple<std::string, std::optional<double>, std::optional<std::size_t>, std::optional<std::size_t>,
                         std::optional<std::size_t>>;
  std::map<Key, std::size_t> index;
  std::vector<Key> order;
  std::vector<std::vector<double>> values;
  std::vector<std::size_t> failures;
  for (const auto& r : rows) {
    Key key{r.metric_name, r.alpha, r.m, r.n, r.d};
    auto [it, fresh] = index.try_emplace(key, order.size());
    if (fresh) {
      order.push_back(key);
      values.emplace_back();
      failures.push_back(0);
    }
    if (std::isfinite(r.metric_value)) {
      values[it->second].push_back(r.metric_value);
    } else {
      ++failures[it->second];
    }
  }

  json cells = json::array();
  for (std::size_t c = 0; c < order.size(); ++c) {
    const auto& v = values[c];
    double mean = 0.0;
    for (const double x : v) {
      mean += x;
    }
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (const double x : v) {
      ss += (x - mean) * (x - mean);
    }
    const auto& [name, alpha, m, n, d] = order[c];
    cells.push_back({{"metric_name", name},
                     {"alpha", or_null(alpha)},
                     {"m", or_null(m)},
                     {"n", or_null(n)},
                     {"d", or_null(d)},
                     {"mean", v.empty() ? json(nullptr) : number_or_null(mean)},
                     {"std", v.size() < 2 ? json(nullptr) : number_or_null(std::sqrt(ss / (v.size() - 1.0)))},
                     {"count", v.size()},
                     {"failures", failures[c]}});
  }
  return {{"experiment", header.experiment},
          {"config_hash", header.config_hash},
          {"seed", header.seed},
          {"cells", cells}};
}

}  // namespace gimdre::detail
