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

#include "gimdre/quadrature.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "gimdre/error.hpp"

namespace gimdre {

QuadratureRule gauss_legendre(double lo, double hi, std::size_t panels) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorKind::invalid_argument, "quadrature interval must be finite and non-empty");
  }
  if (panels == 0) {
    throw Error(ErrorKind::invalid_argument, "quadrature needs at least one panel");
  }
  using Rule = boost::math::quadrature::gauss<double, kPointsPerPanel>;
  // Boost stores the non-negative half of a symmetric rule.
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();

  QuadratureRule rule;
  rule.nodes.reserve(panels * kPointsPerPanel);
  rule.weights.reserve(panels * kPointsPerPanel);
  const double width = (hi - lo) / static_cast<double>(panels);
  for (std::size_t k = 0; k < panels; ++k) {
    const double a = lo + width * static_cast<double>(k);
    const double mid = a + 0.5 * width;
    const double half = 0.5 * width;
    for (std::size_t j = 0; j < abscissa.size(); ++j) {
      rule.nodes.push_back(mid - half * abscissa[j]);
      rule.weights.push_back(half * weights[j]);
      rule.nodes.push_back(mid + half * abscissa[j]);
      rule.weights.push_back(half * weights[j]);
    }
  }
  return rule;
}

}  // namespace gimdre
