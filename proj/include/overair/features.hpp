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

#include <cstddef>
#include <span>
#include <vector>

#include "overair/signal.hpp"

namespace overair {

struct MelConfig {
  std::size_t mel_bins = 40;
  double low_hz = 50.0;
  double high_hz = 7900.0;
  double epsilon = 1e-10;
};

double HzToMel(double hz);
double MelToHz(double mel);

// Triangular HTK-style filters on the STFT bin grid.
struct MelFilterbank {
  std::size_t mels = 0;
  std::size_t bins = 0;
  std::vector<double> center_hz;
  std::vector<double> weights;  // mels x bins

  double at(std::size_t m, std::size_t k) const { return weights[m * bins + k]; }
};

MelFilterbank MakeMelFilterbank(const MelConfig& mel, const StftConfig& stft,
                                int sample_rate = kSampleRate);

struct FeatureMatrix {
  std::size_t frames = 0;
  std::size_t mels = 0;
  std::vector<double> data;  // frames x mels

  double& at(std::size_t t, std::size_t m) { return data[t * mels + m]; }
  double at(std::size_t t, std::size_t m) const { return data[t * mels + m]; }
};

// log(mel(|STFT|^2) + epsilon) on the canonical STFT grid.
class Featurizer {
 public:
  explicit Featurizer(MelConfig mel = {}, StftConfig stft = {});

  FeatureMatrix Compute(std::span<const double> signal) const;
  // dL/dsignal given dL/dfeatures for the same signal.
  std::vector<double> Backward(std::span<const double> signal,
                               const FeatureMatrix& grad) const;

  const MelFilterbank& filterbank() const { return bank_; }
  const StftConfig& stft() const { return stft_; }
  const MelConfig& mel() const { return mel_; }

 private:
  // Mel energies before the log, plus the spectrogram they came from.
  FeatureMatrix Energies(const Spectrogram& spec) const;

  MelConfig mel_;
  StftConfig stft_;
  MelFilterbank bank_;
  // Nonzero filter span per mel band.
  std::vector<std::size_t> first_, last_;
};

}  // namespace overair
