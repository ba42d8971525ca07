// Copyright 2026 The Overair Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace overair::testing {

inline std::vector<double> RandomVector(std::size_t n, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

struct GradientCheck {
  std::size_t checked = 0;
  double worst_relative = 0.0;
};

// Central differences of f at `coords` of x, compared with `grad`. The error
// is relative to max(|fd|, |analytic|, floor) so that near-zero entries do not
// blow up the ratio.
inline GradientCheck CheckGradient(const std::function<double(std::span<const double>)>& f,
                                   std::vector<double> x, std::span<const double> grad,
                                   std::span<const std::size_t> coords, double h,
                                   double floor) {
  GradientCheck r;
  for (std::size_t i : coords) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(grad[i]), floor});
    r.worst_relative = std::max(r.worst_relative, std::abs(fd - grad[i]) / denom);
    ++r.checked;
  }
  return r;
}

inline std::vector<std::size_t> RandomCoords(std::size_t n, std::size_t count,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  std::vector<std::size_t> c(count);
  for (auto& v : c) v = dist(rng);
  return c;
}

}  // namespace overair::testing
