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

#include "overair/ctc.hpp"
#include "overair/rng.hpp"
#include "overair/signal.hpp"

namespace overair {

struct CorpusConfig {
  std::size_t count = 2200;
  std::size_t min_len = 2;
  std::size_t max_len = 6;
  double snr_db = 30.0;
  double edge_pad_s = 0.05;
  double tone_amplitude = 0.1;
  std::uint64_t seed = 1;
};

inline constexpr double kChordSeconds = 0.12;
inline constexpr double kChordEdgeSeconds = 0.01;
inline constexpr double kSymbolGapSeconds = 0.03;

struct Utterance {
  Waveform audio;
  std::string transcript;
};

// Frequencies of each symbol's chord; triples of distinct symbols are disjoint.
std::vector<std::array<double, 3>> ChordTable(const Vocab& vocab);
std::size_t MaxChordSymbols();

// Samples in a rendered transcript of n symbols.
std::size_t RenderedLength(std::size_t n_symbols, double edge_pad_s);

Waveform RenderTranscript(const Vocab& vocab, const std::string& transcript,
                          const CorpusConfig& cfg, Rng& rng);

// Utterance i draws from its own substream of cfg.seed.
std::vector<Utterance> SynthCorpus(const Vocab& vocab, const CorpusConfig& cfg);

// A directory of utt_NNNNN.wav files plus manifest.json mapping file -> text.
void SaveCorpus(const std::string& dir, std::span<const Utterance> corpus);
std::vector<Utterance> LoadCorpus(const std::string& dir);

}  // namespace overair
