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
#include <memory>
#include <span>
#include <vector>

#include "overair/rng.hpp"
#include "overair/room.hpp"
#include "overair/signal.hpp"

namespace overair {

struct AugmentConfig {
  bool enable_fr = true;
  bool enable_rooms = true;
  bool enable_timeshift = true;
  std::size_t pad_max = 1600;
  std::size_t room_batch = 0;  // 0 selects every room
  std::uint64_t seed = 1;
  double fr_low_hz = 50.0;
  double fr_high_hz = 7900.0;
  std::size_t fr_taps = 511;
};

struct Pads {
  std::size_t left = 0;
  std::size_t right = 0;

  bool operator==(const Pads&) const = default;
};

// Independent uniform draws from [0, pad_max] for each end.
Pads DrawPads(std::size_t pad_max, Rng& rng);
Waveform RandomPad(const Waveform& w, std::size_t pad_max, Rng& rng, Pads* pads = nullptr);

struct ChannelOutput {
  std::size_t room = 0;
  Pads pads;
  std::vector<double> audio;  // canonical length
};

// Playback chain for one carrier length: pad -> FR -> RIR -> FR, each stage
// optional. Outputs are zero-extended to a canonical length that holds the
// full convolution for any pads, so every room yields the same shape.
class Channel {
 public:
  Channel(const AugmentConfig& cfg, std::vector<Rir> rirs, std::size_t input_len);

  const AugmentConfig& config() const { return cfg_; }
  std::size_t rooms() const { return rirs_.size(); }
  std::size_t input_length() const { return input_len_; }
  std::size_t output_length() const { return output_len_; }

  // Fixed mid-range pads used for deterministic evaluation.
  Pads CanonicalPads() const;

  // Fused path: one precomputed kernel per room.
  std::vector<double> Apply(std::span<const double> x, std::size_t room, Pads pads) const;
  // dL/dx given dL/d(output).
  std::vector<double> Adjoint(std::span<const double> grad, std::size_t room, Pads pads) const;

  // Stage-by-stage reference of the same chain.
  std::vector<double> ApplyReference(std::span<const double> x, std::size_t room,
                                     Pads pads) const;
  std::vector<double> AdjointReference(std::span<const double> grad, std::size_t room,
                                       Pads pads) const;

  ChannelOutput Simulate(std::span<const double> x, std::size_t room, Rng& rng) const;

  // Rooms used at `iteration`: all of them, or a fresh sorted random subset
  // of room_batch. Pads for (iteration, room) come from their own substream.
  std::vector<std::size_t> SelectRooms(std::uint64_t iteration) const;
  Pads PadsFor(std::uint64_t iteration, std::size_t room) const;
  std::vector<ChannelOutput> Batch(std::span<const double> x, std::uint64_t iteration) const;

  const std::vector<double>& fr_taps() const { return fr_; }
  const std::vector<double>& fused_kernel(std::size_t room) const { return kernels_[room]; }

 private:
  void CheckArgs(std::size_t len, std::size_t room, Pads pads, std::size_t expected) const;
  std::size_t PaddedLength(Pads pads) const { return pads.left + input_len_ + pads.right; }

  AugmentConfig cfg_;
  std::vector<Rir> rirs_;
  std::size_t input_len_;
  std::size_t output_len_ = 0;
  std::vector<double> fr_;
  std::vector<std::vector<double>> kernels_;
  std::vector<std::unique_ptr<FftConvolver>> convolvers_;  // null for identity kernels
};

}  // namespace overair
