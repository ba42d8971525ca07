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


#include "overair/features.hpp"

#include <cmath>

#include "overair/error.hpp"

namespace overair {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank MakeMelFilterbank(const MelConfig& mel, const StftConfig& stft,
                                int sample_rate) {
  stft.Validate();
  Require(mel.mel_bins > 0 && mel.low_hz >= 0.0 && mel.high_hz > mel.low_hz &&
              mel.high_hz <= sample_rate / 2.0,
          ErrorKind::kInvalidInput, "mel filterbank range is invalid");
  MelFilterbank fb;
  fb.mels = mel.mel_bins;
  fb.bins = stft.bins();
  fb.weights.assign(fb.mels * fb.bins, 0.0);
  const double lo = HzToMel(mel.low_hz), hi = HzToMel(mel.high_hz);
  std::vector<double> edges(fb.mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = MelToHz(lo + (hi - lo) * static_cast<double>(i) / (fb.mels + 1));
  }
  const double bin_hz = static_cast<double>(sample_rate) / stft.window_len;
  for (std::size_t m = 0; m < fb.mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    fb.center_hz.push_back(center);
    for (std::size_t k = 0; k < fb.bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > left && f <= center) w = (f - left) / (center - left);
      else if (f > center && f < right) w = (right - f) / (right - center);
      fb.weights[m * fb.bins + k] = w;
    }
  }
  return fb;
}

Featurizer::Featurizer(MelConfig mel, StftConfig stft)
    : mel_(mel), stft_(stft), bank_(MakeMelFilterbank(mel_, stft_)) {
  Require(mel_.epsilon > 0.0, ErrorKind::kInvalidInput, "mel epsilon must be positive");
  first_.assign(bank_.mels, 0);
  last_.assign(bank_.mels, 0);
  for (std::size_t m = 0; m < bank_.mels; ++m) {
    std::size_t a = bank_.bins, b = 0;
    for (std::size_t k = 0; k < bank_.bins; ++k) {
      if (bank_.at(m, k) != 0.0) {
        a = std::min(a, k);
        b = k + 1;
      }
    }
    Require(a < b, ErrorKind::kInvalidInput, "mel band narrower than one STFT bin");
    first_[m] = a;
    last_[m] = b;
  }
}

FeatureMatrix Featurizer::Energies(const Spectrogram& spec) const {
  FeatureMatrix e;
  e.frames = spec.frames;
  e.mels = bank_.mels;
  e.data.assign(e.frames * e.mels, 0.0);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const auto row = spec.frame(t);
    for (std::size_t m = 0; m < bank_.mels; ++m) {
      double acc = 0.0;
      for (std::size_t k = first_[m]; k < last_[m]; ++k) acc += bank_.at(m, k) * std::norm(row[k]);
      e.at(t, m) = acc;
    }
  }
  return e;
}

FeatureMatrix Featurizer::Compute(std::span<const double> signal) const {
  Require(signal.size() >= stft_.window_len, ErrorKind::kInvalidInput,
          "signal shorter than one analysis window");
  FeatureMatrix f = Energies(Stft(signal, stft_));
  for (double& v : f.data) v = std::log(v + mel_.epsilon);
  return f;
}

std::vector<double> Featurizer::Backward(std::span<const double> signal,
                                         const FeatureMatrix& grad) const {
  const Spectrogram spec = Stft(signal, stft_);
  Require(grad.frames == spec.frames && grad.mels == bank_.mels, ErrorKind::kInvalidInput,
          "feature gradient does not match the signal's frame grid");
  const FeatureMatrix e = Energies(spec);
  Spectrogram g = spec;
  for (std::size_t t = 0; t < spec.frames; ++t) {
    // dL/dP_k for the power of each bin, then dP/dX = 2 X.
    std::vector<double> dp(spec.bins, 0.0);
    for (std::size_t m = 0; m < bank_.mels; ++m) {
      const double s = grad.at(t, m) / (e.at(t, m) + mel_.epsilon);
      for (std::size_t k = first_[m]; k < last_[m]; ++k) dp[k] += s * bank_.at(m, k);
    }
    for (std::size_t k = 0; k < spec.bins; ++k) g.at(t, k) = 2.0 * dp[k] * spec.at(t, k);
  }
  return StftAdjoint(g, stft_);
}

}  // namespace overair
