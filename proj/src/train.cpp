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


#include "overair/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "overair/error.hpp"
#include "overair/parallel.hpp"
#include "overair/rng.hpp"
#include "overair/simd.hpp"

namespace overair {

namespace {

std::vector<double> Augment(const Waveform& w, const TrainConfig& cfg, Rng& rng) {
  const auto pad = static_cast<std::int64_t>(cfg.pad_max);
  const auto left = static_cast<std::size_t>(rng.UniformInt(0, pad));
  const auto right = static_cast<std::size_t>(rng.UniformInt(0, pad));
  const double gain = std::exp(rng.Uniform(std::log(cfg.gain_min), std::log(cfg.gain_max)));
  std::vector<double> y(w.samples().begin(), w.samples().end());
  if (!cfg.rirs.empty() && rng.Uniform() < cfg.reverb_probability) {
    const auto& rir = cfg.rirs[rng.UniformInt(0, static_cast<std::int64_t>(cfg.rirs.size()) - 1)];
    if (!cfg.fr_taps.empty()) y = Convolve(y, cfg.fr_taps);
    y = Convolve(y, rir.taps);
    if (!cfg.fr_taps.empty()) y = Convolve(y, cfg.fr_taps);
  }
  std::vector<double> out(left + y.size() + right, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) out[left + i] = gain * y[i];
  return out;
}

}  // namespace

double ExactMatchAccuracy(const AcousticModel& model, std::span<const Utterance> set) {
  if (set.empty()) return 0.0;
  const Recognizer rec(model);
  std::vector<char> hit(set.size(), 0);
  ParallelFor(set.size(), [&](std::size_t i) {
    hit[i] = rec.Transcribe(set[i].audio.samples()) == set[i].transcript;
  });
  return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / set.size();
}

TrainReport Train(AcousticModel& model, std::span<const Utterance> train,
                  std::span<const Utterance> heldout, const TrainConfig& cfg,
                  const std::function<void(std::size_t, double)>& on_epoch) {
  Require(!train.empty(), ErrorKind::kInvalidInput, "training set is empty");
  Require(cfg.batch_size > 0 && cfg.learning_rate > 0.0 && cfg.momentum >= 0.0 &&
              cfg.momentum < 1.0 && cfg.gain_min > 0.0 && cfg.gain_min <= cfg.gain_max,
          ErrorKind::kConfig, "invalid training hyperparameters");
  Require(cfg.reverb_probability >= 0.0 && cfg.reverb_probability <= 1.0, ErrorKind::kConfig,
          "reverb_probability must be in [0, 1]");
  const Recognizer rec(model);
  const std::size_t P = model.params().size();
  const std::size_t first = model.trainable_offset();
  std::vector<double> velocity(P, 0.0);
  std::vector<std::vector<int>> targets(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    targets[i] = model.vocab().Encode(train[i].transcript);
  }

  TrainReport report;
  std::vector<std::size_t> order(train.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle = Rng::Substream(cfg.seed, epoch, 0xFFFFFFFF);
    std::shuffle(order.begin(), order.end(), shuffle.engine());
    double epoch_loss = 0.0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
      const std::size_t nb = std::min(cfg.batch_size, order.size() - b0);
      std::vector<std::vector<double>> grads(nb);
      std::vector<double> losses(nb, 0.0);
      ParallelFor(nb, [&](std::size_t j) {
        const std::size_t i = order[b0 + j];
        Rng rng = Rng::Substream(cfg.seed, epoch, i);
        const std::vector<double> x = Augment(train[i].audio, cfg, rng);
        AcousticModel::Activations cache;
        const Logits logits = model.Forward(rec.featurizer().Compute(x), &cache);
        CtcResult ctc = CtcLoss(logits, targets[i]);
        losses[j] = ctc.loss;
        grads[j].assign(P, 0.0);
        model.Backward(cache, ctc.grad, &grads[j]);
      });
      std::vector<double> g(P, 0.0);
      double batch_loss = 0.0;
      for (std::size_t j = 0; j < nb; ++j) {
        simd::Axpy(1.0 / nb, grads[j], g);
        batch_loss += losses[j];
      }
      const double norm = std::sqrt(simd::SumSquares(g));
      Require(std::isfinite(batch_loss) && std::isfinite(norm), ErrorKind::kTraining,
              "training diverged at epoch " + std::to_string(epoch) + ", batch " +
                  std::to_string(b0 / cfg.batch_size) + " (loss " +
                  std::to_string(batch_loss / nb) + ")");
      const double scale = norm > cfg.grad_clip ? cfg.grad_clip / norm : 1.0;
      auto& p = model.params();
      for (std::size_t k = first; k < P; ++k) {
        velocity[k] = cfg.momentum * velocity[k] - cfg.learning_rate * scale * g[k];
        p[k] += velocity[k];
      }
      epoch_loss += batch_loss;
    }
    report.epoch_loss.push_back(epoch_loss / train.size());
    if (on_epoch) on_epoch(epoch, report.epoch_loss.back());
  }
  report.heldout_count = heldout.size();
  report.heldout_accuracy = ExactMatchAccuracy(model, heldout);
  return report;
}

}  // namespace overair
