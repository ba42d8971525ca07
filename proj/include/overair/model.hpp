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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "overair/ctc.hpp"
#include "overair/features.hpp"

namespace overair {

struct ModelDims {
  static constexpr std::size_t kKernel = 5;
  static constexpr std::size_t kStride = 2;

  std::size_t mels = 40;
  std::size_t hidden = 32;
  std::size_t vocab = 7;  // including blank

  std::size_t ParamCount() const;
};

// Two strided 1-D convolutions (tanh) over normalized log-mel frames, then a
// per-frame affine map to vocabulary logits. Parameters live in one flat
// vector in declaration order:
//   feature mean [mels], feature std [mels],
//   conv1 weight [hidden][kernel][mels], conv1 bias [hidden],
//   conv2 weight [hidden][kernel][hidden], conv2 bias [hidden],
//   output weight [vocab][hidden], output bias [vocab].
// The feature statistics are fixed inputs, not trained.
class AcousticModel {
 public:
  AcousticModel() = default;
  // All weights zero, identity normalization.
  AcousticModel(ModelDims dims, Vocab vocab);

  // Glorot-uniform weights, zero biases; normalization untouched.
  void InitializeRandom(std::uint64_t seed);
  // Sets the feature statistics from a set of feature matrices.
  void FitNormalization(std::span<const FeatureMatrix> features);

  const ModelDims& dims() const { return dims_; }
  const Vocab& vocab() const { return vocab_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  // Offset of the first trainable parameter; entries before it get no gradient.
  std::size_t trainable_offset() const { return 2 * dims_.mels; }

  static std::size_t OutputFrames(std::size_t input_frames);

  struct Activations {
    FeatureMatrix input;  // normalized features
    std::size_t t1 = 0, t2 = 0;
    std::vector<double> h1, h2;  // post-tanh
  };

  Logits Forward(const FeatureMatrix& features, Activations* cache = nullptr) const;
  // Returns dL/dfeatures. When param_grad is non-null, dL/dparams is added to it.
  FeatureMatrix Backward(const Activations& cache, const Logits& grad,
                         std::vector<double>* param_grad) const;

  void Save(const std::string& path) const;
  static AcousticModel Load(const std::string& path);

 private:
  struct Offsets {
    std::size_t mean, std, w1, b1, w2, b2, w3, b3;
  };
  Offsets offsets() const;

  ModelDims dims_;
  Vocab vocab_;
  std::vector<double> params_;
};

// Recognizer front to back: waveform -> features -> logits.
class Recognizer {
 public:
  explicit Recognizer(const AcousticModel& model);

  Logits ComputeLogits(std::span<const double> signal) const;
  std::string Transcribe(std::span<const double> signal) const;
  // Logit frames produced for a signal of this many samples.
  std::size_t OutputFrames(std::size_t samples) const;

  struct LossGradient {
    double loss = 0.0;
    std::vector<double> grad;  // d loss / d signal
  };
  // CTC loss of `target` and its gradient with respect to the samples.
  LossGradient Backprop(std::span<const double> signal, std::span<const int> target,
                        bool with_gradient = true) const;

  const AcousticModel& model() const { return *model_; }
  const Featurizer& featurizer() const { return featurizer_; }

 private:
  const AcousticModel* model_;
  Featurizer featurizer_;
};

}  // namespace overair
