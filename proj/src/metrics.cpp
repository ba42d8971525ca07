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


#include "overair/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "overair/error.hpp"
#include "overair/parallel.hpp"
#include "overair/rng.hpp"

namespace overair {

namespace {

std::vector<std::string> Words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string StripSpace(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

}  // namespace

std::size_t EditDistance(const std::string& a, const std::string& b) {
  return EditDistance<char>(std::span<const char>(a), std::span<const char>(b));
}

double WordErrorRate(const std::string& ref, const std::string& hyp) {
  const auto r = Words(ref), h = Words(hyp);
  Require(!r.empty(), ErrorKind::kInvalidInput, "WER reference is empty");
  return static_cast<double>(EditDistance<std::string>(r, h)) / r.size();
}

double PhonemeErrorRate(const std::string& ref, const std::string& hyp) {
  const auto r = StripSpace(ref), h = StripSpace(hyp);
  Require(!r.empty(), ErrorKind::kInvalidInput, "PER reference is empty");
  return static_cast<double>(EditDistance(r, h)) / r.size();
}

EvalReport EvaluateAttack(std::span<const double> attack, const std::string& target,
                          const Channel& channel, const Recognizer& recognizer,
                          const EvalConfig& cfg) {
  Require(cfg.trials >= 1, ErrorKind::kConfig, "evaluation needs at least one trial");
  Require(!target.empty(), ErrorKind::kInvalidInput, "evaluation target is empty");
  EvalReport report;
  report.trials = cfg.trials;
  report.per_trial.resize(cfg.trials);
  ParallelFor(cfg.trials, [&](std::size_t t) {
    Rng rng = Rng::Substream(cfg.seed, t);
    TrialResult& r = report.per_trial[t];
    r.room = static_cast<std::size_t>(
        rng.UniformInt(0, static_cast<std::int64_t>(channel.rooms()) - 1));
    if (channel.config().enable_timeshift) r.pads = DrawPads(channel.config().pad_max, rng);
    try {
      r.transcript = recognizer.Transcribe(channel.Apply(attack, r.room, r.pads));
    } catch (const Error& e) {
      throw Error(e.kind(), "trial " + std::to_string(t) + ": " + e.what());
    }
    r.success = r.transcript == target;
    r.per = PhonemeErrorRate(target, r.transcript);
    r.wer = WordErrorRate(target, r.transcript);
  });
  for (const TrialResult& r : report.per_trial) {
    report.successes += r.success;
    report.per += r.per;
    report.wer += r.wer;
  }
  report.success_rate = static_cast<double>(report.successes) / cfg.trials;
  report.per /= cfg.trials;
  report.wer /= cfg.trials;
  return report;
}

}  // namespace overair
