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

// Frequency-domain masking thresholds of a carrier and the excess penalty
// ||ReLU(dB(STFT(delta)) - thresholds)||_2 with its exact gradient.
//
// Threshold model (simplified MPEG-1 psychoacoustic model 1), per frame:
//   1. power spectrum in dB, offset so the loudest cell of the carrier is 96 dB
//   2. tonal maskers: strict local maxima at least 7 dB above the bins at
//      distance 2..d, d = 2 below 2.5 kHz, 3 below 5.5 kHz, 6 above
//   3. non-tonal maskers: residual power summed per critical band (one bark)
//   4. two-slope spreading on the bark scale: +27 dB/bark toward lower
//      frequencies, -max(10, 24 + 0.23 (L - 40)) dB/bark toward higher
//   5. power sum of all spread maskers and the absolute threshold of hearing
//   6. clamp to [-20, 96] dB

#include <cstddef>
#include <span>
#include <vector>

#include "overair/signal.hpp"

namespace overair {

inline constexpr double kFullScaleDb = 96.0;
inline constexpr double kThresholdFloorDb = -20.0;

struct MaskingThresholdMatrix {
  std::size_t frames = 0;
  std::size_t bins = 0;
  // Added to 20 log10 |X| to express a cell on the 96 dB scale.
  double reference_db = 0.0;
  std::vector<double> db;  // row-major, frames x bins

  double at(std::size_t frame, std::size_t bin) const { return db[frame * bins + bin]; }
};

struct Masker {
  std::size_t bin = 0;
  double level_db = 0.0;
  bool tonal = false;
};

using MaskerSet = std::vector<std::vector<Masker>>;

// Terhardt quiet threshold in dB SPL; defined on [20, 8000] Hz.
double AbsoluteThreshold(double hz);
double HzToBark(double hz);

// 96 - max cell level of the carrier. A silent carrier falls back to the
// full-scale convention: a unit-amplitude sinusoid reads 96 dB.
double ReferenceDb(const Spectrogram& carrier, const StftConfig& cfg);

MaskerSet FindMaskers(const Spectrogram& carrier, double reference_db);

MaskingThresholdMatrix ComputeMaskingThresholds(const Spectrogram& carrier,
                                                const StftConfig& cfg = {});
// Same, on a caller-chosen dB scale instead of ReferenceDb(carrier).
MaskingThresholdMatrix ComputeMaskingThresholds(const Spectrogram& carrier,
                                                const StftConfig& cfg,
                                                double reference_db);
// Spreads each frame's maskers over the grid and power-sums them with the
// quiet threshold.
MaskingThresholdMatrix ThresholdsFromMaskers(const MaskerSet& maskers, std::size_t bins,
                                             double bin_hz, double reference_db);
inline MaskingThresholdMatrix ComputeMaskingThresholds(const Waveform& carrier,
                                                       const StftConfig& cfg = {}) {
  return ComputeMaskingThresholds(Stft(carrier, cfg), cfg);
}

struct PamEvaluation {
  double value = 0.0;
  std::vector<double> gradient;  // d value / d delta, same length as delta
};

double FPam(std::span<const double> delta, const MaskingThresholdMatrix& m,
            const StftConfig& cfg = {});
std::vector<double> FPamGradient(std::span<const double> delta,
                                 const MaskingThresholdMatrix& m,
                                 const StftConfig& cfg = {});
// Value and gradient from one STFT.
PamEvaluation EvaluatePam(std::span<const double> delta,
                          const MaskingThresholdMatrix& m,
                          const StftConfig& cfg = {}, bool with_gradient = true);

}  // namespace overair
