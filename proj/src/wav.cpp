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

#include "overair/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "overair/error.hpp"

namespace overair {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;
constexpr double kPcm16Scale = 32767.0;

std::uint16_t ReadU16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t ReadU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void PutU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(v & 0xFF);
  out.push_back(v >> 8);
}

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void PutTag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

Waveform ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorKind::kIo,
          "cannot open WAV file: " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  const std::string name = path.string();
  Require(bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          ErrorKind::kFormat, "not a RIFF/WAVE file: " + name);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      Require(available >= 16, ErrorKind::kFormat, "truncated fmt chunk: " + name);
      format = ReadU16(chunk + 8);
      channels = ReadU16(chunk + 10);
      rate = ReadU32(chunk + 12);
      bits = ReadU16(chunk + 22);
      if (format == kFormatExtensible && available >= 26) {
        format = ReadU16(chunk + 8 + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = available;
    }
    pos = body + size + (size & 1);
  }
  Require(format != 0, ErrorKind::kFormat, "missing fmt chunk: " + name);
  Require(data != nullptr, ErrorKind::kFormat, "missing data chunk: " + name);
  Require(channels == 1 || channels == 2, ErrorKind::kFormat,
          "only mono or stereo WAV is supported: " + name);
  Require(rate == static_cast<std::uint32_t>(kSampleRate), ErrorKind::kFormat,
          "WAV sample rate " + std::to_string(rate) + " is not 16000: " + name);
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  Require(pcm16 || float32, ErrorKind::kFormat,
          "unsupported WAV encoding (need PCM16 or float32): " + name);

  const std::size_t frame_bytes = channels * (bits / 8);
  const std::size_t frames = data_size / frame_bytes;
  Require(frames > 0, ErrorKind::kFormat, "WAV file has no samples: " + name);
  std::vector<double> samples(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = data + i * frame_bytes + c * (bits / 8);
      if (pcm16) {
        acc += static_cast<std::int16_t>(ReadU16(p)) / kPcm16Scale;
      } else {
        float f;
        std::uint32_t raw = ReadU32(p);
        std::memcpy(&f, &raw, sizeof(f));
        acc += f;
      }
    }
    samples[i] = acc / channels;
  }
  return Waveform(std::move(samples), static_cast<int>(rate));
}

std::size_t WriteWav(const std::filesystem::path& path, const Waveform& w) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  PutTag(out, "RIFF");
  PutU32(out, 36 + data_bytes);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, kFormatPcm);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(w.sample_rate()));
  PutU32(out, static_cast<std::uint32_t>(w.sample_rate()) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  PutTag(out, "data");
  PutU32(out, data_bytes);
  std::size_t clipped = 0;
  for (double s : w.samples()) {
    if (s > 1.0 || s < -1.0) ++clipped;
    const double c = std::clamp(s, -1.0, 1.0);
    const auto q = static_cast<std::int16_t>(std::lround(c * kPcm16Scale));
    PutU16(out, static_cast<std::uint16_t>(q));
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  Require(static_cast<bool>(file), ErrorKind::kIo,
          "cannot open WAV file for writing: " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  Require(static_cast<bool>(file), ErrorKind::kIo,
          "failed writing WAV file: " + path.string());
  return clipped;
}

}  // namespace overair
