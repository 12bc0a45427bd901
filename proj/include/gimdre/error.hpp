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

#ifndef GIMDRE_ERROR_HPP
#define GIMDRE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace gimdre {

enum class ErrorKind {
  invalid_argument,
  invalid_density,
  invalid_ratio,
  unsupported_model,
  dimension_mismatch,
  singular_alpha,
  numeric_failure,
  missing_argument,
  degenerate_weights,
  wrong_geodesic,
  collapsed_bridge,
  empty_input,
  unsupported_split,
  config_error,
  io_error,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// Every library failure is reported through this type; `kind()` is the
/// machine-readable part, `what()` carries context.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_density: return "invalid-density";
    case ErrorKind::invalid_ratio: return "invalid-ratio";
    case ErrorKind::unsupported_model: return "unsupported-model";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::singular_alpha: return "singular-alpha";
    case ErrorKind::numeric_failure: return "numeric-failure";
    case ErrorKind::missing_argument: return "missing-argument";
    case ErrorKind::degenerate_weights: return "degenerate-weights";
    case ErrorKind::wrong_geodesic: return "wrong-geodesic";
    case ErrorKind::collapsed_bridge: return "collapsed-bridge";
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::unsupported_split: return "unsupported-split";
    case ErrorKind::config_error: return "config-error";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace gimdre

#endif  // GIMDRE_ERROR_HPP
