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

#include "overair/psychoacoustic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "overair/error.hpp"

namespace overair {

namespace {

constexpr double kTonalExcessDb = 7.0;
constexpr double kLowerSlopeDbPerBark = 27.0;
constexpr double kLn10 = std::numbers::ln10;

double PowerToDb(double p) { return 10.0 * std::log10(p); }
double DbToPower(double db) { return std::pow(10.0, 0.1 * db); }

std::size_t TonalNeighborhood(double hz) {
  if (hz < 2500.0) return 2;
  if (hz < 5500.0) return 3;
  return 6;
}

double UpperSlopeDbPerBark(double masker_db) {
  return std::max(10.0, 24.0 + 0.23 * (masker_db - 40.0));
}

void CheckGrid(const Spectrogram& spec, const MaskingThresholdMatrix& m) {
  Require(spec.frames == m.frames && spec.bins == m.bins &&
              m.db.size() == m.frames * m.bins,
          ErrorKind::kInvalidInput,
          "delta spectrogram grid does not match the threshold matrix");
}

}  // namespace

double AbsoluteThreshold(double hz) {
  Require(hz >= 20.0 && hz <= 8000.0, ErrorKind::kInvalidInput,
          "absolute threshold is defined on [20, 8000] Hz");
  const double khz = hz / 1000.0;
  return 3.64 * std::pow(khz, -0.8) - 6.5 * std::exp(-0.6 * (khz - 3.3) * (khz - 3.3)) +
         1e-3 * std::pow(khz, 4.0);
}

double HzToBark(double hz) {
  Require(hz >= 0.0, ErrorKind::kInvalidInput, "frequency must be non-negative");
  return 13.0 * std::atan(0.00076 * hz) + 3.5 * std::atan((hz / 7500.0) * (hz / 7500.0));
}

double ReferenceDb(const Spectrogram& carrier, const StftConfig& cfg) {
  double peak = 0.0;
  for (const auto& c : carrier.data) peak = std::max(peak, std::abs(c));
  if (peak == 0.0) {
    const auto window = MakeWindow(cfg);
    peak = 0.5 * std::accumulate(window.begin(), window.end(), 0.0);
  }
  return kFullScaleDb - 20.0 * std::log10(peak);
}

MaskerSet FindMaskers(const Spectrogram& carrier, double reference_db) {
  const std::size_t bins = carrier.bins;
  const double gain = DbToPower(reference_db);
  MaskerSet maskers(carrier.frames);
  std::vector<double> power(bins), level(bins);
  std::vector<bool> claimed(bins);
  for (std::size_t f = 0; f < carrier.frames; ++f) {
    const auto row = carrier.frame(f);
    for (std::size_t k = 0; k < bins; ++k) {
      power[k] = std::norm(row[k]) * gain;
      level[k] = power[k] > 0.0 ? PowerToDb(power[k]) : -HUGE_VAL;
    }
    std::fill(claimed.begin(), claimed.end(), false);
    auto& out = maskers[f];

    for (std::size_t k = 1; k + 1 < bins; ++k) {
      if (!(power[k] > power[k - 1] && power[k] > power[k + 1])) continue;
      const std::size_t reach = TonalNeighborhood(k * carrier.bin_hz);
      bool tonal = true;
      for (std::size_t j = 2; j <= reach && tonal; ++j) {
        if (k >= j && level[k] < level[k - j] + kTonalExcessDb) tonal = false;
        if (k + j < bins && level[k] < level[k + j] + kTonalExcessDb) tonal = false;
      }
      if (!tonal) continue;
      out.push_back({k, PowerToDb(power[k - 1] + power[k] + power[k + 1]), true});
      const std::size_t lo = k >= reach ? k - reach : 0;
      const std::size_t hi = std::min(bins - 1, k + reach);
      for (std::size_t j = lo; j <= hi; ++j) claimed[j] = true;
    }

    // Residual energy per one-bark critical band, placed at the bin nearest
    // the band's geometric-mean frequency.
    std::size_t k = 0;
    while (k < bins) {
      const int band = static_cast<int>(HzToBark(k * carrier.bin_hz));
      std::size_t end = k;
      double residual = 0.0;
      while (end < bins && static_cast<int>(HzToBark(end * carrier.bin_hz)) == band) {
        if (!claimed[end]) residual += power[end];
        ++end;
      }
      if (residual > 0.0) {
        const double lo_hz = std::max(k * carrier.bin_hz, carrier.bin_hz * 0.5);
        const double hi_hz = (end - 1) * carrier.bin_hz;
        const double center_hz = std::sqrt(lo_hz * std::max(hi_hz, lo_hz));
        std::size_t center = static_cast<std::size_t>(std::lround(center_hz / carrier.bin_hz));
        center = std::clamp(center, k, end - 1);
        out.push_back({center, PowerToDb(residual), false});
      }
      k = end;
    }
    std::sort(out.begin(), out.end(),
              [](const Masker& a, const Masker& b) { return a.bin < b.bin; });
  }
  return maskers;
}

MaskingThresholdMatrix ComputeMaskingThresholds(const Spectrogram& carrier,
                                                const StftConfig& cfg) {
  return ComputeMaskingThresholds(carrier, cfg, ReferenceDb(carrier, cfg));
}

MaskingThresholdMatrix ComputeMaskingThresholds(const Spectrogram& carrier,
                                                const StftConfig& cfg,
                                                double reference_db) {
  cfg.Validate();
  Require(carrier.bins == cfg.bins() &&
              carrier.data.size() == carrier.frames * carrier.bins,
          ErrorKind::kInvalidInput, "carrier spectrogram is not on the STFT grid");
  return ThresholdsFromMaskers(FindMaskers(carrier, reference_db), carrier.bins,
                               carrier.bin_hz, reference_db);
}

MaskingThresholdMatrix ThresholdsFromMaskers(const MaskerSet& maskers, std::size_t bins,
                                             double bin_hz, double reference_db) {
  Require(bins > 0 && bin_hz > 0.0, ErrorKind::kInvalidInput, "empty frequency grid");
  MaskingThresholdMatrix m;
  m.frames = maskers.size();
  m.bins = bins;
  m.reference_db = reference_db;
  m.db.resize(m.frames * m.bins);

  std::vector<double> bark(m.bins), quiet_db(m.bins), quiet_power(m.bins);
  for (std::size_t k = 0; k < m.bins; ++k) {
    const double hz = k * bin_hz;
    bark[k] = HzToBark(hz);
    quiet_db[k] = AbsoluteThreshold(std::clamp(hz, 20.0, 8000.0));
    quiet_power[k] = DbToPower(quiet_db[k]);
  }

  std::vector<double> masked(m.bins);
  for (std::size_t f = 0; f < m.frames; ++f) {
    std::fill(masked.begin(), masked.end(), 0.0);
    for (const Masker& masker : maskers[f]) {
      Require(masker.bin < m.bins, ErrorKind::kInvalidInput, "masker bin off the grid");
      const double z = bark[masker.bin];
      const double upper = UpperSlopeDbPerBark(masker.level_db);
      for (std::size_t k = 0; k < m.bins; ++k) {
        const double dz = bark[k] - z;
        const double spread = dz < 0.0 ? masker.level_db + kLowerSlopeDbPerBark * dz
                                       : masker.level_db - upper * dz;
        masked[k] += DbToPower(spread);
      }
    }
    for (std::size_t k = 0; k < m.bins; ++k) {
      const double total =
          masked[k] > 0.0 ? PowerToDb(quiet_power[k] + masked[k]) : quiet_db[k];
      m.db[f * m.bins + k] = std::clamp(total, kThresholdFloorDb, kFullScaleDb);
    }
  }
  return m;
}

PamEvaluation EvaluatePam(std::span<const double> delta,
                          const MaskingThresholdMatrix& m, const StftConfig& cfg,
                          bool with_gradient) {
  Spectrogram spec = Stft(delta, cfg);
  CheckGrid(spec, m);
  // Cell level on the carrier's scale, floored at -20 dB.
  std::vector<double> excess(spec.data.size(), 0.0);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < spec.data.size(); ++i) {
    const double mag = std::abs(spec.data[i]);
    if (mag == 0.0) continue;
    const double level = 20.0 * std::log10(mag) + m.reference_db;
    if (level <= kThresholdFloorDb) continue;
    const double e = level - m.db[i];
    if (e > 0.0) {
      excess[i] = e;
      sum_sq += e * e;
    }
  }
  PamEvaluation result;
  result.value = std::sqrt(sum_sq);
  if (!with_gradient) return result;
  if (result.value == 0.0) {
    result.gradient.assign(delta.size(), 0.0);
    return result;
  }
  // d/dX of (e/f) * 20 log10|X| = (e/f) * 20 / ln10 * X / |X|^2.
  const double scale = 20.0 / (kLn10 * result.value);
  for (std::size_t i = 0; i < spec.data.size(); ++i) {
    if (excess[i] > 0.0) {
      spec.data[i] *= scale * excess[i] / std::norm(spec.data[i]);
    } else {
      spec.data[i] = 0.0;
    }
  }
  result.gradient = StftAdjoint(spec, cfg);
  return result;
}

double FPam(std::span<const double> delta, const MaskingThresholdMatrix& m,
            const StftConfig& cfg) {
  return EvaluatePam(delta, m, cfg, false).value;
}

std::vector<double> FPamGradient(std::span<const double> delta,
                                 const MaskingThresholdMatrix& m,
                                 const StftConfig& cfg) {
  return EvaluatePam(delta, m, cfg, true).gradient;
}

}  // namespace overair
