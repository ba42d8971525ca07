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


#include "overair/room.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "overair/error.hpp"
#include "overair/parallel.hpp"
#include "overair/rng.hpp"

namespace overair {

namespace {

bool Inside(const Vec3& p, const Vec3& dims) {
  return p.x > 0.0 && p.y > 0.0 && p.z > 0.0 && p.x < dims.x && p.y < dims.y &&
         p.z < dims.z;
}

bool InUnit(double a) { return std::isfinite(a) && a >= 0.0 && a <= 1.0; }

double Distance(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

Vec3 Jitter(const Vec3& p, double range, Rng& rng) {
  if (range == 0.0) return p;
  return {p.x + rng.Uniform(-range, range), p.y + rng.Uniform(-range, range),
          p.z + rng.Uniform(-range, range)};
}

// Image coordinates along one axis: (1 - 2q) s + 2 n L, hitting the wall at 0
// |n - q| times and the wall at L |n| times.
struct AxisImage {
  double coord;
  int lo_hits;
  int hi_hits;
};

std::vector<AxisImage> AxisImages(double s, double length, int max_order) {
  std::vector<AxisImage> out;
  for (int n = -max_order - 1; n <= max_order + 1; ++n) {
    for (int q = 0; q <= 1; ++q) {
      const int lo = std::abs(n - q);
      const int hi = std::abs(n);
      if (lo + hi > max_order) continue;
      out.push_back({(1 - 2 * q) * s + 2.0 * n * length, lo, hi});
    }
  }
  return out;
}

}  // namespace

bool Box::Contains(const Vec3& p) const {
  return p.x >= origin.x && p.x <= origin.x + size.x && p.y >= origin.y &&
         p.y <= origin.y + size.y && p.z >= origin.z && p.z <= origin.z + size.z;
}

void RoomTemplate::Validate() const {
  auto check = [](bool ok, const char* msg) {
    Require(ok, ErrorKind::kInvalidInput, std::string("room: ") + msg);
  };
  check(std::isfinite(dims.x) && std::isfinite(dims.y) && std::isfinite(dims.z) &&
            dims.x > 0.0 && dims.y > 0.0 && dims.z > 0.0,
        "dimensions must be positive");
  check(sofa.size.x > 0.0 && sofa.size.y > 0.0 && sofa.size.z > 0.0,
        "sofa size must be positive");
  // The sofa may rest on the floor or against a wall but not cross one.
  check(sofa.origin.x >= 0.0 && sofa.origin.y >= 0.0 && sofa.origin.z >= 0.0 &&
            sofa.origin.x + sofa.size.x < dims.x && sofa.origin.y + sofa.size.y < dims.y &&
            sofa.origin.z + sofa.size.z < dims.z,
        "sofa must lie inside the room");
  check(Inside(speaker, dims), "speaker outside the room");
  check(Inside(mic, dims), "mic outside the room");
  check(!sofa.Contains(speaker), "speaker inside the sofa");
  check(!sofa.Contains(mic), "mic inside the sofa");
  check(Distance(speaker, mic) > 1e-6, "speaker and mic coincide");
  for (double a : absorption.walls) check(InUnit(a), "wall absorption outside [0, 1]");
  check(InUnit(absorption.floor) && InUnit(absorption.ceiling) && InUnit(absorption.sofa),
        "absorption outside [0, 1]");
  check(curtain_wall >= -1 && curtain_wall < 4, "curtain wall index out of range");
}

bool RoomTemplate::IsValid() const {
  try {
    Validate();
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::vector<RoomVariant> GenerateRooms(const RoomTemplate& t, const RoomGenConfig& cfg) {
  t.Validate();
  Require(cfg.count > 0, ErrorKind::kConfig, "room count must be positive");
  Require(cfg.wall_jitter_m >= 0.0 && cfg.position_jitter_m >= 0.0 &&
              std::isfinite(cfg.wall_jitter_m) && std::isfinite(cfg.position_jitter_m),
          ErrorKind::kConfig, "jitter ranges must be non-negative");
  std::vector<RoomVariant> out(cfg.count);
  for (std::size_t i = 0; i < cfg.count; ++i) {
    Rng rng = Rng::Substream(cfg.seed, i);
    bool found = false;
    for (std::size_t attempt = 0; attempt < cfg.max_retries && !found; ++attempt) {
      RoomTemplate r = t;
      r.dims = Jitter(t.dims, cfg.wall_jitter_m, rng);
      r.speaker = Jitter(t.speaker, cfg.position_jitter_m, rng);
      r.mic = Jitter(t.mic, cfg.position_jitter_m, rng);
      if (r.IsValid()) {
        out[i] = {i, r};
        found = true;
      }
    }
    Require(found, ErrorKind::kGeneration,
            "no valid room after " + std::to_string(cfg.max_retries) +
                " draws; jitter ranges too wide for the template");
  }
  return out;
}

double EffectiveFloorAbsorption(const RoomTemplate& room) {
  const double ratio = (room.sofa.size.x * room.sofa.size.y) / (room.dims.x * room.dims.y);
  return (1.0 - ratio) * room.absorption.floor + ratio * room.absorption.sofa;
}

std::vector<ImageSource> EnumerateImages(const RoomTemplate& room, std::size_t max_order) {
  room.Validate();
  const int order = static_cast<int>(max_order);
  const auto& a = room.absorption;
  const double bx0 = std::sqrt(1.0 - a.walls[0]), bx1 = std::sqrt(1.0 - a.walls[1]);
  const double by0 = std::sqrt(1.0 - a.walls[2]), by1 = std::sqrt(1.0 - a.walls[3]);
  const double bz0 = std::sqrt(1.0 - EffectiveFloorAbsorption(room));
  const double bz1 = std::sqrt(1.0 - a.ceiling);

  const auto xs = AxisImages(room.speaker.x, room.dims.x, order);
  const auto ys = AxisImages(room.speaker.y, room.dims.y, order);
  const auto zs = AxisImages(room.speaker.z, room.dims.z, order);
  std::vector<ImageSource> out;
  for (const auto& ix : xs) {
    const int ox = ix.lo_hits + ix.hi_hits;
    for (const auto& iy : ys) {
      const int oxy = ox + iy.lo_hits + iy.hi_hits;
      if (oxy > order) continue;
      for (const auto& iz : zs) {
        const int o = oxy + iz.lo_hits + iz.hi_hits;
        if (o > order) continue;
        const double gain = std::pow(bx0, ix.lo_hits) * std::pow(bx1, ix.hi_hits) *
                            std::pow(by0, iy.lo_hits) * std::pow(by1, iy.hi_hits) *
                            std::pow(bz0, iz.lo_hits) * std::pow(bz1, iz.hi_hits);
        out.push_back({{ix.coord, iy.coord, iz.coord}, gain, o});
      }
    }
  }
  return out;
}

void AddFractionalImpulse(std::vector<double>& out, double delay, double amplitude) {
  constexpr int kHalf = static_cast<int>(kSincTaps / 2);
  const auto center = static_cast<long>(std::lround(delay));
  for (int k = -kHalf; k <= kHalf; ++k) {
    const long n = center + k;
    if (n < 0 || n >= static_cast<long>(out.size())) continue;
    const double u = static_cast<double>(n) - delay;
    const double x = std::numbers::pi * u;
    const double sinc = u == 0.0 ? 1.0 : std::sin(x) / x;
    const double window = 0.5 * (1.0 + std::cos(2.0 * x / kSincTaps));
    out[n] += amplitude * sinc * window;
  }
}

Rir ComputeRir(const RoomTemplate& room, const RirConfig& cfg) {
  Require(cfg.sample_rate > 0.0 && cfg.max_seconds > 0.0, ErrorKind::kInvalidInput,
          "RIR sample rate and length must be positive");
  const auto cap = static_cast<std::size_t>(std::ceil(cfg.max_seconds * cfg.sample_rate));
  std::vector<double> taps(cap, 0.0);
  for (const ImageSource& img : EnumerateImages(room, cfg.max_order)) {
    if (img.gain == 0.0) continue;
    const double d = Distance(img.position, room.mic);
    const double delay = d / kSpeedOfSound * cfg.sample_rate;
    if (delay - static_cast<double>(kSincTaps / 2) >= static_cast<double>(cap)) continue;
    AddFractionalImpulse(taps, delay, img.gain / d);
  }
  std::size_t last = taps.size();
  while (last > 0 && taps[last - 1] == 0.0) --last;
  Require(last > 0, ErrorKind::kInvalidInput,
          "RIR is empty; the direct path falls outside the maximum length");
  taps.resize(last);
  Rir r;
  r.peak_delay = static_cast<std::size_t>(
      std::max_element(taps.begin(), taps.end(),
                       [](double a, double b) { return std::abs(a) < std::abs(b); }) -
      taps.begin());
  r.taps = std::move(taps);
  return r;
}

std::vector<Rir> ComputeRirs(std::span<const RoomVariant> rooms, const RirConfig& cfg) {
  std::vector<Rir> out(rooms.size());
  ParallelFor(rooms.size(), [&](std::size_t i) { out[i] = ComputeRir(rooms[i].room, cfg); });
  return out;
}

Waveform ApplyRir(const Waveform& w, const Rir& r) {
  Require(w.size() > 0 && !r.taps.empty(), ErrorKind::kInvalidInput,
          "ApplyRir needs a non-empty signal and RIR");
  return Convolve(w, r.taps);
}

void to_json(nlohmann::json& j, const Vec3& v) { j = nlohmann::json::array({v.x, v.y, v.z}); }

void from_json(const nlohmann::json& j, Vec3& v) {
  Require(j.is_array() && j.size() == 3, ErrorKind::kConfig, "expected [x, y, z] in meters");
  v = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(nlohmann::json& j, const RoomTemplate& t) {
  j = {{"dims_m", t.dims},
       {"sofa", {{"origin_m", t.sofa.origin}, {"size_m", t.sofa.size}}},
       {"absorption",
        {{"walls", t.absorption.walls},
         {"floor", t.absorption.floor},
         {"ceiling", t.absorption.ceiling},
         {"sofa", t.absorption.sofa}}},
       {"curtain_wall", t.curtain_wall},
       {"speaker_m", t.speaker},
       {"mic_m", t.mic}};
}

namespace {

void RejectUnknownKeys(const nlohmann::json& j, std::initializer_list<const char*> keys,
                       const char* where) {
  Require(j.is_object(), ErrorKind::kConfig, std::string(where) + " must be an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(keys.begin(), keys.end(),
                                   [&](const char* k) { return item.key() == k; });
    Require(known, ErrorKind::kConfig,
            std::string("unknown key '") + item.key() + "' in " + where);
  }
}

}  // namespace

void from_json(const nlohmann::json& j, RoomTemplate& t) {
  RejectUnknownKeys(j, {"dims_m", "sofa", "absorption", "curtain_wall", "speaker_m", "mic_m"},
                    "room template");
  RoomTemplate d;
  if (j.contains("dims_m")) j.at("dims_m").get_to(d.dims);
  if (j.contains("sofa")) {
    const auto& s = j.at("sofa");
    RejectUnknownKeys(s, {"origin_m", "size_m"}, "sofa");
    if (s.contains("origin_m")) s.at("origin_m").get_to(d.sofa.origin);
    if (s.contains("size_m")) s.at("size_m").get_to(d.sofa.size);
  }
  if (j.contains("absorption")) {
    const auto& a = j.at("absorption");
    RejectUnknownKeys(a, {"walls", "floor", "ceiling", "sofa"}, "absorption");
    if (a.contains("walls")) a.at("walls").get_to(d.absorption.walls);
    if (a.contains("floor")) a.at("floor").get_to(d.absorption.floor);
    if (a.contains("ceiling")) a.at("ceiling").get_to(d.absorption.ceiling);
    if (a.contains("sofa")) a.at("sofa").get_to(d.absorption.sofa);
  }
  if (j.contains("curtain_wall")) j.at("curtain_wall").get_to(d.curtain_wall);
  if (j.contains("speaker_m")) j.at("speaker_m").get_to(d.speaker);
  if (j.contains("mic_m")) j.at("mic_m").get_to(d.mic);
  t = d;
}

void to_json(nlohmann::json& j, const RoomGenConfig& c) {
  j = {{"count", c.count},
       {"wall_jitter_m", c.wall_jitter_m},
       {"position_jitter_m", c.position_jitter_m},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, RoomGenConfig& c) {
  RejectUnknownKeys(j, {"count", "wall_jitter_m", "position_jitter_m", "seed"},
                    "room generation");
  RoomGenConfig d;
  if (j.contains("count")) j.at("count").get_to(d.count);
  if (j.contains("wall_jitter_m")) j.at("wall_jitter_m").get_to(d.wall_jitter_m);
  if (j.contains("position_jitter_m")) j.at("position_jitter_m").get_to(d.position_jitter_m);
  if (j.contains("seed")) j.at("seed").get_to(d.seed);
  c = d;
}

void to_json(nlohmann::json& j, const RoomVariant& v) {
  j = v.room;
  j["id"] = v.id;
}

void from_json(const nlohmann::json& j, RoomVariant& v) {
  Require(j.is_object() && j.contains("id"), ErrorKind::kFormat, "room variant needs an id");
  nlohmann::json rest = j;
  rest.erase("id");
  v.id = j.at("id").get<std::size_t>();
  v.room = rest.get<RoomTemplate>();
  v.room.Validate();
}

}  // namespace overair
