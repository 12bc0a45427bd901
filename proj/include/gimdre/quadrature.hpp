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

#ifndef GIMDRE_QUADRATURE_HPP
#define GIMDRE_QUADRATURE_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gimdre {

struct QuadratureSpec {
  /// Panels of the composite rule; each panel uses 16 Gauss-Legendre nodes,
  /// so the default gives 4096 nodes.
  std::size_t panels = 256;
  /// Half-width of the integration window in standard deviations.
  double half_width = 12.0;
  /// Monte Carlo fallback for d >= 2.
  std::size_t mc_samples = 100000;
  std::uint64_t mc_seed = 0;
};

/// Nodes and weights in the original variable x: int f dx ~ sum w_i f(x_i).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
};

inline constexpr std::size_t kPointsPerPanel = 16;

/// Composite 16-point Gauss-Legendre rule on [lo, hi].
[[nodiscard]] QuadratureRule gauss_legendre(double lo, double hi, std::size_t panels);

/// Applies the change of variables x = g(u): nodes g(u_i), weights w_i g'(u_i).
template <class G, class DG>
QuadratureRule transform(const QuadratureRule& rule, G g, DG dg) {
  QuadratureRule out;
  out.nodes.reserve(rule.size());
  out.weights.reserve(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    out.nodes.push_back(g(rule.nodes[i]));
    out.weights.push_back(rule.weights[i] * dg(rule.nodes[i]));
  }
  return out;
}

}  // namespace gimdre

#endif  // GIMDRE_QUADRATURE_HPP
