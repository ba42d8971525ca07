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

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "overair/corpus.hpp"
#include "overair/model.hpp"
#include "overair/room.hpp"

namespace overair {

struct TrainConfig {
  std::size_t epochs = 30;
  double learning_rate = 0.02;
  double momentum = 0.9;
  std::size_t batch_size = 16;
  double grad_clip = 5.0;  // global L2 norm per batch
  // Augmentation: zero padding of both ends and a random gain, redrawn per
  // epoch, so digital silence and level changes are seen in training.
  std::size_t pad_max = 1600;
  double gain_min = 0.25;
  double gain_max = 2.0;
  // Optional playback simulation: with this probability an utterance is
  // band-limited by `fr_taps` (if any) and convolved with one of `rirs`.
  std::vector<Rir> rirs;
  std::vector<double> fr_taps;
  double reverb_probability = 0.0;
  std::uint64_t seed = 1;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean CTC loss per epoch
  double heldout_accuracy = 0.0;
  std::size_t heldout_count = 0;
};

// Fraction of utterances whose greedy transcription equals the reference.
double ExactMatchAccuracy(const AcousticModel& model, std::span<const Utterance> set);

// Momentum SGD on mean CTC loss. Batch gradients are summed in utterance order
// so results do not depend on the thread count.
TrainReport Train(AcousticModel& model, std::span<const Utterance> train,
                  std::span<const Utterance> heldout, const TrainConfig& cfg,
                  const std::function<void(std::size_t, double)>& on_epoch = {});

}  // namespace overair
