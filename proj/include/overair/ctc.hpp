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
#include <string>
#include <vector>

namespace overair {

// Symbol alphabet; index 0 is the CTC blank, symbols follow in order.
class Vocab {
 public:
  Vocab() = default;
  explicit Vocab(std::string symbols);

  const std::string& symbols() const { return symbols_; }
  // Including the blank.
  std::size_t size() const { return symbols_.size() + 1; }
  std::vector<int> Encode(const std::string& text) const;
  std::string Decode(std::span<const int> labels) const;

 private:
  std::string symbols_;
};

struct Logits {
  std::size_t frames = 0;
  std::size_t vocab = 0;
  std::vector<double> data;  // frames x vocab

  double& at(std::size_t t, std::size_t k) { return data[t * vocab + k]; }
  double at(std::size_t t, std::size_t k) const { return data[t * vocab + k]; }
};

// Frames needed to emit `target`: one per label plus a blank between repeats.
std::size_t CtcMinFrames(std::span<const int> target);

struct CtcResult {
  double loss = 0.0;
  Logits grad;  // d loss / d logits
};

// Negative log-likelihood of `target` (labels in [1, vocab)) under the CTC
// alignment model, via log-space forward-backward.
CtcResult CtcLoss(const Logits& logits, std::span<const int> target,
                  bool with_gradient = true);

// Per-frame argmax (lowest index wins ties), repeats collapsed, blanks removed.
std::vector<int> GreedyDecode(const Logits& logits);
std::string GreedyDecode(const Logits& logits, const Vocab& vocab);

}  // namespace overair
