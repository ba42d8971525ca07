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


#include "overair/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "overair/error.hpp"
#include "overair/features.hpp"
#include "overair/wav.hpp"

namespace overair {

namespace {

constexpr std::size_t kGridSize = 24;
constexpr double kGridLowHz = 300.0;
constexpr double kGridHighHz = 3400.0;

std::size_t Samples(double seconds) {
  return static_cast<std::size_t>(std::lround(seconds * kSampleRate));
}

}  // namespace

std::size_t MaxChordSymbols() { return kGridSize / 3; }

std::vector<std::array<double, 3>> ChordTable(const Vocab& vocab) {
  const std::size_t n = vocab.symbols().size();
  Require(n <= MaxChordSymbols(), ErrorKind::kConfig,
          "vocabulary of " + std::to_string(n) + " symbols exceeds the " +
              std::to_string(MaxChordSymbols()) + " available chords");
  // Grid evenly spaced in mel; symbol i takes one low, one middle and one
  // high grid point so chords differ across the whole band.
  std::array<double, kGridSize> grid{};
  const double lo = HzToMel(kGridLowHz), hi = HzToMel(kGridHighHz);
  for (std::size_t i = 0; i < kGridSize; ++i) {
    grid[i] = MelToHz(lo + (hi - lo) * static_cast<double>(i) / (kGridSize - 1));
  }
  const std::size_t stride = MaxChordSymbols();
  std::vector<std::array<double, 3>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {grid[i], grid[i + stride], grid[i + 2 * stride]};
  return out;
}

std::size_t RenderedLength(std::size_t n_symbols, double edge_pad_s) {
  if (n_symbols == 0) return 2 * Samples(edge_pad_s);
  return 2 * Samples(edge_pad_s) + n_symbols * Samples(kChordSeconds) +
         (n_symbols - 1) * Samples(kSymbolGapSeconds);
}

Waveform RenderTranscript(const Vocab& vocab, const std::string& transcript,
                          const CorpusConfig& cfg, Rng& rng) {
  const auto chords = ChordTable(vocab);
  const std::vector<int> labels = vocab.Encode(transcript);
  std::vector<double> x(RenderedLength(labels.size(), cfg.edge_pad_s), 0.0);
  const std::size_t chord_len = Samples(kChordSeconds);
  const std::size_t edge = Samples(kChordEdgeSeconds);
  std::size_t start = Samples(cfg.edge_pad_s);
  for (int label : labels) {
    for (double hz : chords[label - 1]) {
      const double phase = rng.Uniform(0.0, 2.0 * std::numbers::pi);
      for (std::size_t i = 0; i < chord_len; ++i) {
        double env = 1.0;
        if (i < edge) env = 0.5 * (1.0 - std::cos(std::numbers::pi * i / edge));
        else if (i >= chord_len - edge)
          env = 0.5 * (1.0 - std::cos(std::numbers::pi * (chord_len - 1 - i) / edge));
        x[start + i] += cfg.tone_amplitude * env *
                        std::sin(2.0 * std::numbers::pi * hz * i / kSampleRate + phase);
      }
    }
    start += chord_len + Samples(kSymbolGapSeconds);
  }
  double power = 0.0;
  for (double v : x) power += v * v;
  power /= static_cast<double>(x.size());
  if (power > 0.0) {
    const double sigma = std::sqrt(power / std::pow(10.0, cfg.snr_db / 10.0));
    for (double& v : x) v += rng.Normal(0.0, sigma);
  }
  return Waveform(std::move(x));
}

std::vector<Utterance> SynthCorpus(const Vocab& vocab, const CorpusConfig& cfg) {
  Require(cfg.count > 0, ErrorKind::kConfig, "corpus count must be positive");
  Require(cfg.min_len >= 1 && cfg.min_len <= cfg.max_len, ErrorKind::kConfig,
          "corpus length range is invalid");
  ChordTable(vocab);
  const auto n_symbols = static_cast<std::int64_t>(vocab.symbols().size());
  std::vector<Utterance> out;
  out.reserve(cfg.count);
  for (std::size_t i = 0; i < cfg.count; ++i) {
    Rng rng = Rng::Substream(cfg.seed, i);
    const auto len = static_cast<std::size_t>(rng.UniformInt(
        static_cast<std::int64_t>(cfg.min_len), static_cast<std::int64_t>(cfg.max_len)));
    std::string text;
    for (std::size_t j = 0; j < len; ++j) {
      text.push_back(vocab.symbols()[rng.UniformInt(0, n_symbols - 1)]);
    }
    Waveform audio = RenderTranscript(vocab, text, cfg, rng);
    out.push_back({std::move(audio), std::move(text)});
  }
  return out;
}

void SaveCorpus(const std::string& dir, std::span<const Utterance> corpus) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  Require(!ec, ErrorKind::kIo, "cannot create corpus directory " + dir);
  nlohmann::ordered_json manifest = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "utt_%05zu.wav", i);
    WriteWav((fs::path(dir) / name).string(), corpus[i].audio);
    manifest[name] = corpus[i].transcript;
  }
  std::ofstream out(fs::path(dir) / "manifest.json");
  Require(static_cast<bool>(out), ErrorKind::kIo, "cannot write corpus manifest");
  out << manifest.dump(1) << "\n";
}

std::vector<Utterance> LoadCorpus(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "manifest.json");
  Require(static_cast<bool>(in), ErrorKind::kIo, "no manifest.json in " + dir);
  nlohmann::ordered_json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kFormat, std::string("corpus manifest: ") + e.what());
  }
  Require(manifest.is_object() && !manifest.empty(), ErrorKind::kFormat,
          "corpus manifest must be a non-empty object");
  std::vector<Utterance> out;
  for (const auto& [name, text] : manifest.items()) {
    Require(text.is_string(), ErrorKind::kFormat, "transcript for " + name + " is not a string");
    out.push_back({ReadWav((fs::path(dir) / name).string()), text.get<std::string>()});
  }
  return out;
}

}  // namespace overair
