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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "overair/channel.hpp"
#include "overair/model.hpp"
#include "overair/psychoacoustic.hpp"

namespace overair {

struct AttackConfig {
  std::string target;
  double lambda_step = 0.05;
  double lambda_max = 1.0;
  std::size_t check_interval = 10;
  double learning_rate = 1e-3;
  std::size_t max_iterations = 20000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip = 0.5;
  double init_range = 1e-4;
  std::uint64_t seed = 1;

  void Validate() const;
  // Total matches needed to climb from 0 to lambda_max.
  std::size_t LambdaIncrements() const;
};

struct HistoryRecord {
  std::size_t iteration = 0;
  double lambda = 0.0;
  double ctc_sum = 0.0;
  double f_pam = 0.0;
  std::size_t matches = 0;
  std::size_t total_rooms = 0;
};

struct AttackState {
  std::vector<double> delta;
  std::vector<double> m, v;  // optimizer moments
  std::size_t iteration = 0;
  std::size_t lambda_steps = 0;  // lambda = min(steps * lambda_step, lambda_max)
  std::vector<HistoryRecord> history;
  // Best so far: highest lambda with a total match, else lowest check loss.
  std::vector<double> best_delta;
  double best_match_lambda = -1.0;
  double best_loss = 0.0;
};

enum class AttackStatus { kSuccess, kBudgetExhausted };
const char* AttackStatusName(AttackStatus s);

struct AttackResult {
  AttackStatus status = AttackStatus::kBudgetExhausted;
  std::vector<double> delta;
  std::vector<double> x_prime;
  double lambda = 0.0;              // schedule value when the run ended
  double best_match_lambda = -1.0;  // -1 when no check matched
  std::size_t iterations = 0;
  std::vector<HistoryRecord> history;
};

// What the exported 16-bit file will hold: clipped to [-1, 1] and rounded to
// the PCM grid.
std::vector<double> QuantizeForExport(std::span<const double> x);

struct LossValue {
  double value = 0.0;
  double ctc_sum = 0.0;
  double f_pam = 0.0;
  std::vector<double> grad;
};

struct MatchResult {
  bool all = false;
  std::size_t matches = 0;
  double ctc_sum = 0.0;
  std::vector<std::string> transcripts;  // per room
};

// Carrier, channel, recognizer, mask and target bound together.
class AttackProblem {
 public:
  AttackProblem(std::span<const double> carrier, const Channel& channel,
                const Recognizer& recognizer, MaskingThresholdMatrix mask, std::string target,
                StftConfig stft = {});

  // Sum over the rooms drawn for `iteration` of the CTC loss of the channel
  // output, plus lambda * f_PAM(delta) once.
  LossValue CombinedLoss(std::span<const double> delta, double lambda, std::uint64_t iteration,
                         bool with_gradient = true) const;
  // Every room with the canonical pads, on the quantized x + delta.
  MatchResult CheckTotalMatch(std::span<const double> delta) const;

  std::span<const double> carrier() const { return carrier_; }
  const Channel& channel() const { return *channel_; }
  const std::vector<int>& target_labels() const { return target_; }
  const std::string& target() const { return target_text_; }
  const MaskingThresholdMatrix& mask() const { return mask_; }
  const StftConfig& stft() const { return stft_; }

 private:
  std::vector<double> carrier_;
  const Channel* channel_;
  const Recognizer* recognizer_;
  MaskingThresholdMatrix mask_;
  std::string target_text_;
  std::vector<int> target_;
  StftConfig stft_;
};

struct AttackHooks {
  // Called after every check with the new history record.
  std::function<void(const HistoryRecord&)> on_check;
  // Called with the state every `checkpoint_every` checks (0 disables).
  std::size_t checkpoint_every = 0;
  std::function<void(const AttackState&)> on_checkpoint;
};

AttackResult GenerateAttack(const AttackProblem& problem, const AttackConfig& cfg,
                            const AttackHooks& hooks = {},
                            std::optional<AttackState> resume = std::nullopt);

void SaveAttackState(const std::string& path, const AttackState& s);
AttackState LoadAttackState(const std::string& path);

void WriteHistoryCsv(const std::string& path, std::span<const HistoryRecord> history);

struct ExportSummary {
  std::size_t clipped = 0;
};
// Writes x' = x + delta and delta as 16-bit WAVs.
ExportSummary ExportAttack(const AttackResult& result, const std::string& attack_path,
                           const std::string& delta_path);

}  // namespace overair
