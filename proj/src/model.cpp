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


#include "overair/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "overair/error.hpp"
#include "overair/rng.hpp"
#include "overair/simd.hpp"

namespace overair {

static_assert(std::endian::native == std::endian::little,
              "model files are read and written as little-endian");

namespace {

constexpr char kMagic[4] = {'A', 'S', 'R', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t K = ModelDims::kKernel;
constexpr std::size_t kPad = ModelDims::kKernel / 2;

std::size_t Strided(std::size_t n) { return (n + ModelDims::kStride - 1) / ModelDims::kStride; }

// y[t][o] = tanh(b[o] + sum_k W[o][k] . x[2t + k - pad]) with zero padding.
void ConvForward(const double* x, std::size_t t_in, std::size_t c_in, const double* w,
                 const double* b, std::size_t c_out, std::size_t t_out, double* y) {
  for (std::size_t t = 0; t < t_out; ++t) {
    for (std::size_t o = 0; o < c_out; ++o) {
      double acc = b[o];
      for (std::size_t k = 0; k < K; ++k) {
        const long src = static_cast<long>(ModelDims::kStride * t + k) - static_cast<long>(kPad);
        if (src < 0 || src >= static_cast<long>(t_in)) continue;
        acc += simd::Dot({w + (o * K + k) * c_in, c_in}, {x + src * c_in, c_in});
      }
      y[t * c_out + o] = std::tanh(acc);
    }
  }
}

// Given dL/dy (post-tanh), adds dL/dW, dL/db (if non-null) and dL/dx.
void ConvBackward(const double* x, std::size_t t_in, std::size_t c_in, const double* w,
                  std::size_t c_out, std::size_t t_out, const double* y, const double* gy,
                  double* gw, double* gb, double* gx) {
  for (std::size_t t = 0; t < t_out; ++t) {
    for (std::size_t o = 0; o < c_out; ++o) {
      const double v = y[t * c_out + o];
      const double ga = gy[t * c_out + o] * (1.0 - v * v);
      if (ga == 0.0) continue;
      if (gb) gb[o] += ga;
      for (std::size_t k = 0; k < K; ++k) {
        const long src = static_cast<long>(ModelDims::kStride * t + k) - static_cast<long>(kPad);
        if (src < 0 || src >= static_cast<long>(t_in)) continue;
        if (gw) simd::Axpy(ga, {x + src * c_in, c_in}, {gw + (o * K + k) * c_in, c_in});
        simd::Axpy(ga, {w + (o * K + k) * c_in, c_in}, {gx + src * c_in, c_in});
      }
    }
  }
}

void WriteU32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t ReadU32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  Require(static_cast<bool>(in), ErrorKind::kFormat, "model file truncated");
  return v;
}

}  // namespace

std::size_t ModelDims::ParamCount() const {
  return 2 * mels + hidden * kKernel * mels + hidden + hidden * kKernel * hidden + hidden +
         vocab * hidden + vocab;
}

AcousticModel::AcousticModel(ModelDims dims, Vocab vocab)
    : dims_(dims), vocab_(std::move(vocab)) {
  Require(dims_.mels > 0 && dims_.hidden > 0, ErrorKind::kConfig,
          "model dimensions must be positive");
  Require(dims_.vocab == vocab_.size(), ErrorKind::kConfig,
          "model vocabulary size does not match the vocabulary");
  params_.assign(dims_.ParamCount(), 0.0);
  const Offsets o = offsets();
  std::fill(params_.begin() + o.std, params_.begin() + o.std + dims_.mels, 1.0);
}

AcousticModel::Offsets AcousticModel::offsets() const {
  Offsets o;
  o.mean = 0;
  o.std = o.mean + dims_.mels;
  o.w1 = o.std + dims_.mels;
  o.b1 = o.w1 + dims_.hidden * K * dims_.mels;
  o.w2 = o.b1 + dims_.hidden;
  o.b2 = o.w2 + dims_.hidden * K * dims_.hidden;
  o.w3 = o.b2 + dims_.hidden;
  o.b3 = o.w3 + dims_.vocab * dims_.hidden;
  return o;
}

void AcousticModel::InitializeRandom(std::uint64_t seed) {
  const Offsets o = offsets();
  Rng rng(seed);
  auto fill = [&](std::size_t at, std::size_t n, std::size_t fan_in, std::size_t fan_out) {
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < n; ++i) params_[at + i] = rng.Uniform(-r, r);
  };
  fill(o.w1, dims_.hidden * K * dims_.mels, K * dims_.mels, K * dims_.hidden);
  fill(o.w2, dims_.hidden * K * dims_.hidden, K * dims_.hidden, K * dims_.hidden);
  fill(o.w3, dims_.vocab * dims_.hidden, dims_.hidden, dims_.vocab);
  std::fill(params_.begin() + o.b1, params_.begin() + o.w2, 0.0);
  std::fill(params_.begin() + o.b2, params_.begin() + o.w3, 0.0);
  std::fill(params_.begin() + o.b3, params_.end(), 0.0);
}

void AcousticModel::FitNormalization(std::span<const FeatureMatrix> features) {
  const std::size_t M = dims_.mels;
  std::vector<double> sum(M, 0.0), sq(M, 0.0);
  std::size_t n = 0;
  for (const auto& f : features) {
    Require(f.mels == M, ErrorKind::kInvalidInput, "feature width does not match the model");
    for (std::size_t t = 0; t < f.frames; ++t) {
      for (std::size_t m = 0; m < M; ++m) {
        sum[m] += f.at(t, m);
        sq[m] += f.at(t, m) * f.at(t, m);
      }
    }
    n += f.frames;
  }
  Require(n > 1, ErrorKind::kInvalidInput, "not enough frames to fit normalization");
  const Offsets o = offsets();
  for (std::size_t m = 0; m < M; ++m) {
    const double mean = sum[m] / n;
    const double var = std::max(sq[m] / n - mean * mean, 0.0);
    params_[o.mean + m] = mean;
    params_[o.std + m] = std::max(std::sqrt(var), 1e-3);
  }
}

std::size_t AcousticModel::OutputFrames(std::size_t input_frames) {
  return Strided(Strided(input_frames));
}

Logits AcousticModel::Forward(const FeatureMatrix& features, Activations* cache) const {
  Require(features.frames > 0 && features.mels == dims_.mels &&
              features.data.size() == features.frames * features.mels,
          ErrorKind::kInvalidInput, "features do not match the model input");
  const Offsets o = offsets();
  const std::size_t M = dims_.mels, H = dims_.hidden, V = dims_.vocab;
  Activations local;
  Activations& a = cache ? *cache : local;
  a.input = features;
  for (std::size_t t = 0; t < features.frames; ++t) {
    for (std::size_t m = 0; m < M; ++m) {
      a.input.at(t, m) = (features.at(t, m) - params_[o.mean + m]) / params_[o.std + m];
    }
  }
  a.t1 = Strided(features.frames);
  a.t2 = Strided(a.t1);
  a.h1.assign(a.t1 * H, 0.0);
  a.h2.assign(a.t2 * H, 0.0);
  const double* p = params_.data();
  ConvForward(a.input.data.data(), features.frames, M, p + o.w1, p + o.b1, H, a.t1, a.h1.data());
  ConvForward(a.h1.data(), a.t1, H, p + o.w2, p + o.b2, H, a.t2, a.h2.data());
  Logits out;
  out.frames = a.t2;
  out.vocab = V;
  out.data.resize(a.t2 * V);
  for (std::size_t t = 0; t < a.t2; ++t) {
    for (std::size_t v = 0; v < V; ++v) {
      out.at(t, v) = p[o.b3 + v] + simd::Dot({p + o.w3 + v * H, H}, {a.h2.data() + t * H, H});
    }
  }
  return out;
}

FeatureMatrix AcousticModel::Backward(const Activations& a, const Logits& grad,
                                      std::vector<double>* param_grad) const {
  const Offsets o = offsets();
  const std::size_t M = dims_.mels, H = dims_.hidden, V = dims_.vocab;
  Require(grad.frames == a.t2 && grad.vocab == V, ErrorKind::kInvalidInput,
          "logit gradient does not match the forward pass");
  if (param_grad) {
    Require(param_grad->size() == params_.size(), ErrorKind::kInvalidInput,
            "parameter gradient has the wrong size");
  }
  const double* p = params_.data();
  double* g = param_grad ? param_grad->data() : nullptr;

  std::vector<double> gh2(a.t2 * H, 0.0);
  for (std::size_t t = 0; t < a.t2; ++t) {
    for (std::size_t v = 0; v < V; ++v) {
      const double gl = grad.at(t, v);
      if (gl == 0.0) continue;
      if (g) {
        g[o.b3 + v] += gl;
        simd::Axpy(gl, {a.h2.data() + t * H, H}, {g + o.w3 + v * H, H});
      }
      simd::Axpy(gl, {p + o.w3 + v * H, H}, {gh2.data() + t * H, H});
    }
  }
  std::vector<double> gh1(a.t1 * H, 0.0);
  ConvBackward(a.h1.data(), a.t1, H, p + o.w2, H, a.t2, a.h2.data(), gh2.data(),
               g ? g + o.w2 : nullptr, g ? g + o.b2 : nullptr, gh1.data());
  FeatureMatrix gx;
  gx.frames = a.input.frames;
  gx.mels = M;
  gx.data.assign(gx.frames * M, 0.0);
  ConvBackward(a.input.data.data(), a.input.frames, M, p + o.w1, H, a.t1, a.h1.data(),
               gh1.data(), g ? g + o.w1 : nullptr, g ? g + o.b1 : nullptr, gx.data.data());
  for (std::size_t t = 0; t < gx.frames; ++t) {
    for (std::size_t m = 0; m < M; ++m) gx.at(t, m) /= p[o.std + m];
  }
  return gx;
}

void AcousticModel::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  Require(static_cast<bool>(out), ErrorKind::kIo, "cannot write model file " + path);
  out.write(kMagic, 4);
  WriteU32(out, kVersion);
  WriteU32(out, static_cast<std::uint32_t>(dims_.mels));
  WriteU32(out, static_cast<std::uint32_t>(dims_.hidden));
  WriteU32(out, static_cast<std::uint32_t>(dims_.vocab));
  WriteU32(out, static_cast<std::uint32_t>(ModelDims::kKernel));
  WriteU32(out, static_cast<std::uint32_t>(ModelDims::kStride));
  WriteU32(out, static_cast<std::uint32_t>(vocab_.symbols().size()));
  out.write(vocab_.symbols().data(), static_cast<std::streamsize>(vocab_.symbols().size()));
  out.write(reinterpret_cast<const char*>(params_.data()),
            static_cast<std::streamsize>(params_.size() * sizeof(double)));
  Require(static_cast<bool>(out), ErrorKind::kIo, "failed writing model file " + path);
}

AcousticModel AcousticModel::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorKind::kIo, "cannot open model file " + path);
  char magic[4] = {};
  in.read(magic, 4);
  Require(in && std::memcmp(magic, kMagic, 4) == 0, ErrorKind::kFormat,
          path + " is not a model file");
  const std::uint32_t version = ReadU32(in);
  Require(version == kVersion, ErrorKind::kFormat,
          "unsupported model file version " + std::to_string(version));
  ModelDims dims;
  dims.mels = ReadU32(in);
  dims.hidden = ReadU32(in);
  dims.vocab = ReadU32(in);
  Require(ReadU32(in) == ModelDims::kKernel && ReadU32(in) == ModelDims::kStride,
          ErrorKind::kFormat, "model file has an unsupported architecture");
  const std::uint32_t n_symbols = ReadU32(in);
  Require(n_symbols + 1 == dims.vocab && n_symbols < 256, ErrorKind::kFormat,
          "model file vocabulary is inconsistent");
  std::string symbols(n_symbols, '\0');
  in.read(symbols.data(), n_symbols);
  Require(static_cast<bool>(in), ErrorKind::kFormat, "model file truncated");
  AcousticModel m(dims, Vocab(symbols));
  in.read(reinterpret_cast<char*>(m.params_.data()),
          static_cast<std::streamsize>(m.params_.size() * sizeof(double)));
  Require(static_cast<bool>(in), ErrorKind::kFormat, "model file truncated");
  Require(in.peek() == std::char_traits<char>::eof(), ErrorKind::kFormat,
          "trailing bytes in model file");
  for (double v : m.params_) {
    Require(std::isfinite(v), ErrorKind::kFormat, "model file holds non-finite parameters");
  }
  return m;
}

Recognizer::Recognizer(const AcousticModel& model)
    : model_(&model), featurizer_(MelConfig{.mel_bins = model.dims().mels}) {}

Logits Recognizer::ComputeLogits(std::span<const double> signal) const {
  return model_->Forward(featurizer_.Compute(signal));
}

std::string Recognizer::Transcribe(std::span<const double> signal) const {
  return GreedyDecode(ComputeLogits(signal), model_->vocab());
}

std::size_t Recognizer::OutputFrames(std::size_t samples) const {
  return AcousticModel::OutputFrames(featurizer_.stft().FrameCount(samples));
}

Recognizer::LossGradient Recognizer::Backprop(std::span<const double> signal,
                                              std::span<const int> target,
                                              bool with_gradient) const {
  AcousticModel::Activations cache;
  const FeatureMatrix features = featurizer_.Compute(signal);
  const Logits logits = model_->Forward(features, &cache);
  CtcResult ctc = CtcLoss(logits, target, with_gradient);
  LossGradient r;
  r.loss = ctc.loss;
  if (!with_gradient) return r;
  const FeatureMatrix gf = model_->Backward(cache, ctc.grad, nullptr);
  r.grad = featurizer_.Backward(signal, gf);
  return r;
}

}  // namespace overair
