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

#ifndef GIMDRE_TYPES_HPP
#define GIMDRE_TYPES_HPP

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>

#include <Eigen/Core>

namespace gimdre {

using Vector = Eigen::VectorXd;

/// Sample matrices hold one point per row. Row-major so that a row binds to
/// `PointRef` without a copy.
using Samples = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using PointRef = Eigen::Ref<const Eigen::VectorXd>;

/// A ratio-valued function x -> r(x) > 0.
using RatioFn = std::function<double(const PointRef&)>;

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a base seed and a path of tags,
/// e.g. derive_seed(base, {trial, stage}).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = mix64(base);
  for (const auto t : tags) {
    h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
  }
  return h;
}

inline auto row(const Samples& x, Eigen::Index i) { return x.row(i).transpose(); }

}  // namespace gimdre

#endif  // GIMDRE_TYPES_HPP
