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
#include <span>
#include <string>
#include <vector>

#include "overair/channel.hpp"
#include "overair/model.hpp"

namespace overair {

// Levenshtein distance with unit costs.
template <typename T>
std::size_t EditDistance(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t EditDistance(const std::string& a, const std::string& b);

// Word error rate over whitespace tokens; not clamped to 1.
double WordErrorRate(const std::string& ref, const std::string& hyp);
// Character-level stand-in for phoneme error rate; whitespace is ignored.
double PhonemeErrorRate(const std::string& ref, const std::string& hyp);

struct TrialResult {
  std::size_t room = 0;
  Pads pads;
  std::string transcript;
  bool success = false;
  double per = 0.0;
  double wer = 0.0;
};

struct EvalReport {
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double per = 0.0;
  double wer = 0.0;
  std::vector<TrialResult> per_trial;
};

struct EvalConfig {
  std::size_t trials = 10;
  std::uint64_t seed = 1;
};

// Each trial picks a room of `channel` uniformly and pads from the channel's
// pad range, decodes, and scores against the target.
EvalReport EvaluateAttack(std::span<const double> attack, const std::string& target,
                          const Channel& channel, const Recognizer& recognizer,
                          const EvalConfig& cfg);

}  // namespace overair
