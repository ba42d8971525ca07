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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include "overair/error.hpp"
#include "overair/rng.hpp"
#include "oracles.hpp"

namespace {

using overair::ComputeRir;
using overair::EnumerateImages;
using overair::RirConfig;
using overair::RoomTemplate;
using overair::Vec3;
using overair::testing::MirrorImages;
using overair::testing::Reconstruct;

RoomTemplate AnechoicRoom() {
  RoomTemplate r;
  r.dims = {8.0, 6.0, 4.0};
  r.sofa = {{0.2, 0.2, 0.0}, {1.0, 0.5, 0.5}};
  r.absorption.walls = {1.0, 1.0, 1.0, 1.0};
  r.absorption.floor = r.absorption.ceiling = r.absorption.sofa = 1.0;
  r.speaker = {1.0, 3.0, 2.0};
  r.mic = {6.0, 3.0, 2.0};
  return r;
}

TEST(Rir, AnechoicRoomGivesAnalyticDirectPath) {
  const RoomTemplate room = AnechoicRoom();
  const double d = 5.0;
  const double expected_center = d / 343.0 * 16000.0;
  EXPECT_NEAR(expected_center, 233.2, 0.05);
  for (std::size_t order : {0u, 1u, 3u, 6u}) {
    RirConfig cfg;
    cfg.max_order = order;
    const auto rir = ComputeRir(room, cfg);
    double best_t = 0.0, best = -1.0;
    for (double t = 220.0; t < 246.0; t += 0.01) {
      const double v = Reconstruct(rir.taps, t);
      if (v > best) {
        best = v;
        best_t = t;
      }
    }
    EXPECT_NEAR(best_t, expected_center, 0.5) << "order " << order;
    EXPECT_NEAR(best, 1.0 / d, 0.01 / d) << "order " << order;
    EXPECT_EQ(rir.peak_delay, 233u);
    // Nothing beyond the 81-tap pulse.
    EXPECT_LE(rir.taps.size(), 234u + 40u);
  }
}

TEST(Rir, IntegerDelayIsSingleTap) {
  RoomTemplate room = AnechoicRoom();
  room.mic = {1.0 + 343.0 * 200.0 / 16000.0, 3.0, 2.0};  // 200 samples
  const auto rir = ComputeRir(room);
  const double d = 343.0 * 200.0 / 16000.0;
  EXPECT_NEAR(rir.taps[200], 1.0 / d, 1e-12);
  for (std::size_t n = 0; n < rir.taps.size(); ++n) {
    if (n != 200) EXPECT_NEAR(rir.taps[n], 0.0, 1e-12);
  }
}

TEST(Rir, OrderZeroIgnoresAbsorption) {
  RoomTemplate live;
  RoomTemplate dead = live;
  dead.absorption.walls = {1.0, 1.0, 1.0, 1.0};
  dead.absorption.floor = dead.absorption.ceiling = dead.absorption.sofa = 1.0;
  RirConfig cfg;
  cfg.max_order = 0;
  EXPECT_EQ(ComputeRir(live, cfg).taps, ComputeRir(dead, cfg).taps);
}

TEST(Images, MatchMirrorEnumeration) {
  RoomTemplate room;
  room.absorption.walls = {0.1, 0.2, 0.3, 0.4};
  room.absorption.floor = 0.25;
  room.absorption.ceiling = 0.15;
  const std::size_t expected_counts[] = {1, 7, 25};
  for (int order = 0; order <= 2; ++order) {
    const auto oracle = MirrorImages(room, order);
    const auto images = EnumerateImages(room, order);
    EXPECT_EQ(images.size(), expected_counts[order]);
    ASSERT_EQ(images.size(), oracle.size()) << "order " << order;
    for (const auto& img : images) {
      const auto k = std::make_tuple(std::lround(img.position.x * 1e6),
                                     std::lround(img.position.y * 1e6),
                                     std::lround(img.position.z * 1e6));
      const auto it = oracle.find(k);
      ASSERT_NE(it, oracle.end()) << img.position.x << " " << img.position.y << " "
                                  << img.position.z;
      EXPECT_EQ(img.order, it->second.order);
      EXPECT_NEAR(img.gain, it->second.gain, 1e-12);
    }
  }
}

TEST(Images, CountGrowsCubically) {
  // Images of exactly order m in a shoebox: 4 m^2 + 2.
  const RoomTemplate room;
  std::size_t prev = 1;
  for (std::size_t m = 1; m <= 6; ++m) {
    const std::size_t total = EnumerateImages(room, m).size();
    EXPECT_EQ(total - prev, 4 * m * m + 2) << "order " << m;
    prev = total;
  }
}

TEST(Rir, Reciprocity) {
  RoomTemplate a;
  RoomTemplate b = a;
  std::swap(b.speaker, b.mic);
  const auto ra = ComputeRir(a);
  const auto rb = ComputeRir(b);
  ASSERT_EQ(ra.taps.size(), rb.taps.size());
  for (std::size_t n = 0; n < ra.taps.size(); ++n) {
    EXPECT_NEAR(ra.taps[n], rb.taps[n], 1e-9) << "tap " << n;
  }
}

TEST(Rir, Deterministic) {
  const RoomTemplate room;
  EXPECT_EQ(ComputeRir(room).taps, ComputeRir(room).taps);
}

double TailEnergy(const overair::Rir& r) {
  double e = 0.0;
  for (std::size_t n = r.peak_delay + 41; n < r.taps.size(); ++n) e += r.taps[n] * r.taps[n];
  return e;
}

TEST(Rir, TailEnergyFallsWithAbsorption) {
  const RoomTemplate base;
  const double e0 = TailEnergy(ComputeRir(base));
  for (int surface = 0; surface < 7; ++surface) {
    RoomTemplate more = base;
    auto& a = more.absorption;
    double* target = surface < 4 ? &a.walls[surface]
                     : surface == 4 ? &a.floor
                     : surface == 5 ? &a.ceiling
                                    : &a.sofa;
    *target = std::min(1.0, *target + 0.2);
    EXPECT_LT(TailEnergy(ComputeRir(more)), e0) << "surface " << surface;
  }
}

TEST(Rir, TapsBoundedByCoveringImages) {
  const RoomTemplate room;
  const RirConfig cfg;
  const auto rir = ComputeRir(room, cfg);
  std::vector<double> bound(rir.taps.size(), 0.0);
  for (const auto& img : EnumerateImages(room, cfg.max_order)) {
    const double d = std::hypot(img.position.x - room.mic.x, img.position.y - room.mic.y,
                                img.position.z - room.mic.z);
    const double delay = d / 343.0 * 16000.0;
    for (long n = std::lround(delay) - 40; n <= std::lround(delay) + 40; ++n) {
      if (n >= 0 && n < static_cast<long>(bound.size())) bound[n] += img.gain / d;
    }
  }
  for (std::size_t n = 0; n < rir.taps.size(); ++n) {
    ASSERT_TRUE(std::isfinite(rir.taps[n]));
    EXPECT_LE(std::abs(rir.taps[n]), bound[n] + 1e-12) << "tap " << n;
  }
}

TEST(Rir, LengthCapped) {
  RirConfig cfg;
  cfg.max_order = 30;
  cfg.max_seconds = 0.1;
  const auto rir = ComputeRir(RoomTemplate{}, cfg);
  EXPECT_LE(rir.taps.size(), 1600u);
}

TEST(Rir, DegenerateGeometryRejected) {
  RoomTemplate r;
  r.dims.z = 0.0;
  EXPECT_THROW(ComputeRir(r), overair::Error);
  RoomTemplate same;
  same.mic = same.speaker;
  EXPECT_THROW(ComputeRir(same), overair::Error);
}

TEST(Rir, SofaRaisesFloorAbsorption) {
  const RoomTemplate r;
  const double ratio = 1.8 * 0.8 / (5.0 * 4.0);
  EXPECT_NEAR(overair::EffectiveFloorAbsorption(r), 0.25 * (1 - ratio) + 0.6 * ratio, 1e-15);
}

TEST(ApplyRir, MatchesNaiveConvolution) {
  const auto rir = ComputeRir(RoomTemplate{});
  overair::Rng rng(3);
  std::vector<double> x(3000);
  for (double& v : x) v = rng.Uniform(-1.0, 1.0);
  const auto y = overair::ApplyRir(overair::Waveform(x), rir);
  ASSERT_EQ(y.size(), x.size() + rir.taps.size() - 1);
  for (std::size_t n = 0; n < y.size(); n += 7) {
    double acc = 0.0;
    for (std::size_t k = 0; k < rir.taps.size(); ++k) {
      if (n >= k && n - k < x.size()) acc += rir.taps[k] * x[n - k];
    }
    EXPECT_NEAR(y.samples()[n], acc, 1e-9) << "sample " << n;
  }
}

TEST(ApplyRir, UnitImpulseAndDelay) {
  std::vector<double> x = {0.5, -0.25, 1.0};
  overair::Rir unit{{1.0}, 0};
  EXPECT_EQ(overair::ApplyRir(overair::Waveform(x), unit).vector(), x);
  overair::Rir delay{{0.0, 0.0, 1.0}, 2};
  const auto y = overair::ApplyRir(overair::Waveform(x), delay).vector();
  EXPECT_EQ(y, (std::vector<double>{0.0, 0.0, 0.5, -0.25, 1.0}));
}

TEST(GenerateRooms, CountAndValidity) {
  overair::RoomGenConfig cfg;
  cfg.count = 700;
  const auto rooms = overair::GenerateRooms(RoomTemplate{}, cfg);
  ASSERT_EQ(rooms.size(), 700u);
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    EXPECT_EQ(rooms[i].id, i);
    EXPECT_TRUE(rooms[i].room.IsValid());
    EXPECT_LE(std::abs(rooms[i].room.dims.x - 5.0), 0.5);
    EXPECT_LE(std::abs(rooms[i].room.mic.y - 2.0), 0.3);
  }
}

TEST(GenerateRooms, DeterministicAndSeedSensitive) {
  overair::RoomGenConfig cfg;
  cfg.count = 25;
  const nlohmann::json a = overair::GenerateRooms(RoomTemplate{}, cfg);
  const nlohmann::json b = overair::GenerateRooms(RoomTemplate{}, cfg);
  EXPECT_EQ(a.dump(), b.dump());
  cfg.seed = 2;
  const nlohmann::json c = overair::GenerateRooms(RoomTemplate{}, cfg);
  EXPECT_NE(a.dump(), c.dump());
}

TEST(GenerateRooms, ZeroJitterCopiesTemplate) {
  overair::RoomGenConfig cfg;
  cfg.count = 5;
  cfg.wall_jitter_m = cfg.position_jitter_m = 0.0;
  const RoomTemplate t;
  const nlohmann::json tj = t;
  for (const auto& v : overair::GenerateRooms(t, cfg)) {
    EXPECT_EQ(nlohmann::json(v.room).dump(), tj.dump());
  }
}

TEST(GenerateRooms, UnsatisfiableJitterFails) {
  overair::RoomGenConfig cfg;
  cfg.count = 2;
  cfg.position_jitter_m = 1000.0;
  try {
    overair::GenerateRooms(RoomTemplate{}, cfg);
    FAIL() << "expected a generation error";
  } catch (const overair::Error& e) {
    EXPECT_EQ(e.kind(), overair::ErrorKind::kGeneration);
  }
}

TEST(RoomJson, RoundTripAndUnknownKeys) {
  overair::RoomGenConfig cfg;
  cfg.count = 3;
  const auto rooms = overair::GenerateRooms(RoomTemplate{}, cfg);
  const nlohmann::json j = rooms;
  const auto back = j.get<std::vector<overair::RoomVariant>>();
  ASSERT_EQ(back.size(), rooms.size());
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    EXPECT_EQ(ComputeRir(back[i].room).taps, ComputeRir(rooms[i].room).taps);
  }
  nlohmann::json bad = nlohmann::json(RoomTemplate{});
  bad["colour"] = "red";
  EXPECT_THROW(bad.get<RoomTemplate>(), overair::Error);
}

TEST(RoomTemplate, PlacementRules) {
  RoomTemplate r;
  r.speaker = {2.0, 0.6, 0.3};  // inside the sofa
  EXPECT_FALSE(r.IsValid());
  r = RoomTemplate{};
  r.absorption.walls[1] = 1.5;
  EXPECT_FALSE(r.IsValid());
  r = RoomTemplate{};
  r.sofa.origin.x = 4.0;
  EXPECT_FALSE(r.IsValid());
  EXPECT_TRUE(RoomTemplate{}.IsValid());
}

}  // namespace
