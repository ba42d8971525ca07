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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "overair/signal.hpp"

namespace overair {

inline constexpr double kSpeedOfSound = 343.0;  // m/s
inline constexpr std::size_t kSincTaps = 81;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

struct Box {
  Vec3 origin;  // lowest corner
  Vec3 size;

  bool Contains(const Vec3& p) const;
};

// Walls are indexed x=0, x=W, y=0, y=D.
struct Absorption {
  std::array<double, 4> walls{0.10, 0.10, 0.10, 0.40};
  double floor = 0.25;
  double ceiling = 0.15;
  double sofa = 0.60;
};

struct RoomTemplate {
  Vec3 dims{5.0, 4.0, 2.7};
  Box sofa{{1.6, 0.3, 0.0}, {1.8, 0.8, 0.7}};
  Absorption absorption;
  int curtain_wall = 3;  // index into absorption.walls, -1 for none
  Vec3 speaker{1.2, 2.4, 1.2};
  Vec3 mic{3.4, 2.0, 1.0};

  // Throws kInvalidInput on the first broken placement rule.
  void Validate() const;
  bool IsValid() const;
};

struct RoomVariant {
  std::size_t id = 0;
  RoomTemplate room;
};

struct RoomGenConfig {
  std::size_t count = 30;
  double wall_jitter_m = 0.5;
  double position_jitter_m = 0.3;
  std::uint64_t seed = 1;
  std::size_t max_retries = 1000;
};

struct RirConfig {
  std::size_t max_order = 6;
  double max_seconds = 0.5;
  double sample_rate = kSampleRate;
};

struct Rir {
  std::vector<double> taps;
  std::size_t peak_delay = 0;
};

struct ImageSource {
  Vec3 position;
  double gain = 1.0;  // product of reflection coefficients
  int order = 0;
};

std::vector<RoomVariant> GenerateRooms(const RoomTemplate& t, const RoomGenConfig& cfg);

// Floor absorption after folding in the sofa's footprint.
double EffectiveFloorAbsorption(const RoomTemplate& room);

// Every image of the speaker with reflection order <= max_order.
std::vector<ImageSource> EnumerateImages(const RoomTemplate& room, std::size_t max_order);

Rir ComputeRir(const RoomTemplate& room, const RirConfig& cfg = {});
std::vector<Rir> ComputeRirs(std::span<const RoomVariant> rooms, const RirConfig& cfg = {});

// Adds amplitude * windowed-sinc centered at `delay` samples into `out`.
void AddFractionalImpulse(std::vector<double>& out, double delay, double amplitude);

Waveform ApplyRir(const Waveform& w, const Rir& r);

void to_json(nlohmann::json& j, const Vec3& v);
void from_json(const nlohmann::json& j, Vec3& v);
void to_json(nlohmann::json& j, const RoomTemplate& t);
void from_json(const nlohmann::json& j, RoomTemplate& t);
void to_json(nlohmann::json& j, const RoomGenConfig& c);
void from_json(const nlohmann::json& j, RoomGenConfig& c);
void to_json(nlohmann::json& j, const RoomVariant& v);
void from_json(const nlohmann::json& j, RoomVariant& v);

}  // namespace overair
