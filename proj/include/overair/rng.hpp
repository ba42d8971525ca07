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

#include <cstdint>
#include <random>

namespace overair {

// Deterministic random source. Substreams are keyed by (seed, a, b) through a
// SplitMix64 mix, so draws for e.g. (iteration, room) never depend on the
// order in which other streams were consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(Mix(seed)) {}

  static Rng Substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return Rng(Mix(seed ^ Mix(a + 0x9E3779B97F4A7C15ULL) ^
                   Mix(b + 0xD1B54A32D192ED03ULL)));
  }

  // Uniform integer in [lo, hi].
  std::int64_t UniformInt(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  // Uniform real in [lo, hi).
  double Uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double Normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  std::uint64_t Next() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

  static std::uint64_t Mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace overair
