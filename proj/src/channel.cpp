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


#include "overair/channel.hpp"

#include <algorithm>
#include <numeric>

#include "overair/error.hpp"
#include "overair/parallel.hpp"

namespace overair {

namespace {

constexpr std::uint64_t kSelectStream = 0xFFFFFFFFFFFFULL;

void CopyInto(std::span<const double> src, std::size_t offset, std::vector<double>& dst) {
  const std::size_t n = std::min(src.size(), dst.size() > offset ? dst.size() - offset : 0);
  std::copy_n(src.begin(), n, dst.begin() + static_cast<std::ptrdiff_t>(offset));
}

}  // namespace

Pads DrawPads(std::size_t pad_max, Rng& rng) {
  const auto hi = static_cast<std::int64_t>(pad_max);
  Pads p;
  p.left = static_cast<std::size_t>(rng.UniformInt(0, hi));
  p.right = static_cast<std::size_t>(rng.UniformInt(0, hi));
  return p;
}

Waveform RandomPad(const Waveform& w, std::size_t pad_max, Rng& rng, Pads* pads) {
  const Pads p = DrawPads(pad_max, rng);
  if (pads) *pads = p;
  std::vector<double> out(p.left + w.size() + p.right, 0.0);
  std::copy(w.samples().begin(), w.samples().end(), out.begin() + static_cast<std::ptrdiff_t>(p.left));
  return Waveform(std::move(out), w.sample_rate());
}

Channel::Channel(const AugmentConfig& cfg, std::vector<Rir> rirs, std::size_t input_len)
    : cfg_(cfg), rirs_(std::move(rirs)), input_len_(input_len) {
  Require(input_len_ > 0, ErrorKind::kInvalidInput, "channel input is empty");
  Require(!rirs_.empty(), ErrorKind::kInvalidInput, "channel needs at least one room");
  Require(cfg_.room_batch <= rirs_.size(), ErrorKind::kConfig,
          "room_batch exceeds the number of rooms");
  for (const Rir& r : rirs_) {
    Require(!r.taps.empty(), ErrorKind::kInvalidInput, "channel got an empty RIR");
  }
  if (cfg_.enable_fr) {
    fr_ = DesignBandpass(cfg_.fr_low_hz, cfg_.fr_high_hz, kSampleRate, cfg_.fr_taps).taps;
  }
  std::size_t longest = 1;
  kernels_.resize(rirs_.size());
  convolvers_.resize(rirs_.size());
  for (std::size_t r = 0; r < rirs_.size(); ++r) {
    std::vector<double> k = {1.0};
    if (cfg_.enable_fr) k = fr_;
    if (cfg_.enable_rooms) k = Convolve(k, rirs_[r].taps);
    if (cfg_.enable_fr) k = Convolve(k, fr_);
    longest = std::max(longest, k.size());
    if (k.size() > 1 || k[0] != 1.0) {
      convolvers_[r] = std::make_unique<FftConvolver>(k, input_len_);
    }
    kernels_[r] = std::move(k);
  }
  const std::size_t pad_total = cfg_.enable_timeshift ? 2 * cfg_.pad_max : 0;
  output_len_ = input_len_ + pad_total + longest - 1;
}

Pads Channel::CanonicalPads() const {
  if (!cfg_.enable_timeshift) return {};
  return {cfg_.pad_max / 2, cfg_.pad_max / 2};
}

void Channel::CheckArgs(std::size_t len, std::size_t room, Pads pads,
                        std::size_t expected) const {
  Require(room < rirs_.size(), ErrorKind::kInvalidInput, "room index out of range");
  Require(len == expected, ErrorKind::kInvalidInput, "channel signal has the wrong length");
  const std::size_t limit = cfg_.enable_timeshift ? cfg_.pad_max : 0;
  Require(pads.left <= limit && pads.right <= limit, ErrorKind::kInvalidInput,
          "pads exceed pad_max");
}

std::vector<double> Channel::Apply(std::span<const double> x, std::size_t room,
                                   Pads pads) const {
  CheckArgs(x.size(), room, pads, input_len_);
  std::vector<double> out(output_len_, 0.0);
  if (!convolvers_[room]) {
    CopyInto(x, pads.left, out);
  } else {
    CopyInto(convolvers_[room]->Convolve(x), pads.left, out);
  }
  return out;
}

std::vector<double> Channel::Adjoint(std::span<const double> grad, std::size_t room,
                                     Pads pads) const {
  CheckArgs(grad.size(), room, pads, output_len_);
  const std::size_t n = input_len_ + kernels_[room].size() - 1;
  const auto slice = grad.subspan(pads.left, n);
  if (!convolvers_[room]) return {slice.begin(), slice.end()};
  return convolvers_[room]->Adjoint(slice, input_len_);
}

std::vector<double> Channel::ApplyReference(std::span<const double> x, std::size_t room,
                                            Pads pads) const {
  CheckArgs(x.size(), room, pads, input_len_);
  std::vector<double> y(PaddedLength(pads), 0.0);
  std::copy(x.begin(), x.end(), y.begin() + static_cast<std::ptrdiff_t>(pads.left));
  if (cfg_.enable_fr) y = Convolve(y, fr_);
  if (cfg_.enable_rooms) y = Convolve(y, rirs_[room].taps);
  if (cfg_.enable_fr) y = Convolve(y, fr_);
  y.resize(output_len_, 0.0);
  return y;
}

std::vector<double> Channel::AdjointReference(std::span<const double> grad,
                                              std::size_t room, Pads pads) const {
  CheckArgs(grad.size(), room, pads, output_len_);
  // Lengths after each forward stage.
  const std::size_t n0 = PaddedLength(pads);
  const std::size_t n1 = cfg_.enable_fr ? n0 + fr_.size() - 1 : n0;
  const std::size_t n2 = cfg_.enable_rooms ? n1 + rirs_[room].taps.size() - 1 : n1;
  const std::size_t n3 = cfg_.enable_fr ? n2 + fr_.size() - 1 : n2;
  std::vector<double> g(grad.begin(), grad.begin() + static_cast<std::ptrdiff_t>(n3));
  if (cfg_.enable_fr) g = ConvolveAdjoint(g, fr_, n2);
  if (cfg_.enable_rooms) g = ConvolveAdjoint(g, rirs_[room].taps, n1);
  if (cfg_.enable_fr) g = ConvolveAdjoint(g, fr_, n0);
  return {g.begin() + static_cast<std::ptrdiff_t>(pads.left),
          g.begin() + static_cast<std::ptrdiff_t>(pads.left + input_len_)};
}

ChannelOutput Channel::Simulate(std::span<const double> x, std::size_t room, Rng& rng) const {
  ChannelOutput out;
  out.room = room;
  if (cfg_.enable_timeshift) out.pads = DrawPads(cfg_.pad_max, rng);
  out.audio = Apply(x, room, out.pads);
  return out;
}

std::vector<std::size_t> Channel::SelectRooms(std::uint64_t iteration) const {
  std::vector<std::size_t> ids(rirs_.size());
  std::iota(ids.begin(), ids.end(), 0);
  if (cfg_.room_batch == 0 || cfg_.room_batch == ids.size()) return ids;
  Rng rng = Rng::Substream(cfg_.seed, iteration, kSelectStream);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < cfg_.room_batch; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.UniformInt(static_cast<std::int64_t>(i), static_cast<std::int64_t>(ids.size()) - 1));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(cfg_.room_batch);
  std::sort(ids.begin(), ids.end());
  return ids;
}

Pads Channel::PadsFor(std::uint64_t iteration, std::size_t room) const {
  if (!cfg_.enable_timeshift) return {};
  Rng rng = Rng::Substream(cfg_.seed, iteration, room);
  return DrawPads(cfg_.pad_max, rng);
}

std::vector<ChannelOutput> Channel::Batch(std::span<const double> x,
                                          std::uint64_t iteration) const {
  const auto ids = SelectRooms(iteration);
  Require(!ids.empty(), ErrorKind::kInvalidInput, "no rooms selected");
  std::vector<ChannelOutput> out(ids.size());
  ParallelFor(ids.size(), [&](std::size_t i) {
    out[i].room = ids[i];
    out[i].pads = PadsFor(iteration, ids[i]);
    out[i].audio = Apply(x, ids[i], out[i].pads);
  });
  return out;
}

}  // namespace overair
