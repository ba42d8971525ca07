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


#include "overair/attack.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "overair/error.hpp"
#include "overair/parallel.hpp"
#include "overair/rng.hpp"
#include "overair/wav.hpp"

namespace overair {

namespace {

constexpr char kStateMagic[4] = {'A', 'T', 'K', 'S'};
constexpr std::uint32_t kStateVersion = 1;
constexpr std::uint64_t kInitStream = 0xA77AC4ULL;

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double MaxAbs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> Add(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <typename T>
void Put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T Get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  Require(static_cast<bool>(in), ErrorKind::kFormat, "attack checkpoint truncated");
  return v;
}

void PutVector(std::ostream& out, const std::vector<double>& v) {
  Put<std::uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> GetVector(std::istream& in) {
  const auto n = Get<std::uint64_t>(in);
  Require(n < (1ULL << 32), ErrorKind::kFormat, "attack checkpoint vector too long");
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  Require(static_cast<bool>(in), ErrorKind::kFormat, "attack checkpoint truncated");
  return v;
}

}  // namespace

void AttackConfig::Validate() const {
  Require(!target.empty(), ErrorKind::kConfig, "attack target is empty");
  Require(lambda_step > 0.0 && lambda_step <= 1.0, ErrorKind::kConfig,
          "lambda_step must be in (0, 1]");
  Require(lambda_max >= 0.0 && lambda_max <= 1.0, ErrorKind::kConfig,
          "lambda_max must be in [0, 1]");
  Require(check_interval >= 1, ErrorKind::kConfig, "check_interval must be at least 1");
  Require(clip > 0.0 && clip <= 1.0, ErrorKind::kConfig, "clip must be in (0, 1]");
  Require(learning_rate > 0.0 && beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 &&
              epsilon > 0.0 && init_range >= 0.0,
          ErrorKind::kConfig, "invalid optimizer settings");
}

std::size_t AttackConfig::LambdaIncrements() const {
  return static_cast<std::size_t>(std::ceil(lambda_max / lambda_step - 1e-9));
}

const char* AttackStatusName(AttackStatus s) {
  return s == AttackStatus::kSuccess ? "success" : "iteration-budget-exhausted";
}

std::vector<double> QuantizeForExport(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = static_cast<double>(std::lround(std::clamp(x[i], -1.0, 1.0) * 32767.0)) / 32767.0;
  }
  return out;
}

AttackProblem::AttackProblem(std::span<const double> carrier, const Channel& channel,
                             const Recognizer& recognizer, MaskingThresholdMatrix mask,
                             std::string target, StftConfig stft)
    : carrier_(carrier.begin(), carrier.end()),
      channel_(&channel),
      recognizer_(&recognizer),
      mask_(std::move(mask)),
      target_text_(std::move(target)),
      target_(recognizer.model().vocab().Encode(target_text_)),
      stft_(stft) {
  Require(carrier_.size() == channel.input_length(), ErrorKind::kInvalidInput,
          "carrier length does not match the channel");
  Require(mask_.frames == stft_.FrameCount(carrier_.size()) && mask_.bins == stft_.bins(),
          ErrorKind::kInvalidInput, "masking thresholds do not match the carrier");
  const std::size_t frames = recognizer.OutputFrames(channel.output_length());
  Require(frames >= CtcMinFrames(target_), ErrorKind::kInvalidInput,
          "target '" + target_text_ + "' needs " + std::to_string(CtcMinFrames(target_)) +
              " output frames, the channel gives " + std::to_string(frames));
}

LossValue AttackProblem::CombinedLoss(std::span<const double> delta, double lambda,
                                      std::uint64_t iteration, bool with_gradient) const {
  Require(delta.size() == carrier_.size(), ErrorKind::kInvalidInput,
          "delta length does not match the carrier");
  const std::vector<double> x = Add(carrier_, delta);
  const auto rooms = channel_->SelectRooms(iteration);
  std::vector<double> losses(rooms.size(), 0.0);
  std::vector<std::vector<double>> grads(rooms.size());
  ParallelFor(rooms.size(), [&](std::size_t i) {
    const std::size_t room = rooms[i];
    const Pads pads = channel_->PadsFor(iteration, room);
    const auto y = channel_->Apply(x, room, pads);
    try {
      auto r = recognizer_->Backprop(y, target_, with_gradient);
      losses[i] = r.loss;
      if (with_gradient) grads[i] = channel_->Adjoint(r.grad, room, pads);
    } catch (const Error& e) {
      throw Error(e.kind(), "room " + std::to_string(room) + ": " + e.what());
    }
  });
  LossValue out;
  if (with_gradient) out.grad.assign(delta.size(), 0.0);
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    out.ctc_sum += losses[i];
    if (with_gradient) {
      for (std::size_t k = 0; k < delta.size(); ++k) out.grad[k] += grads[i][k];
    }
  }
  if (lambda != 0.0) {
    PamEvaluation pam = EvaluatePam(delta, mask_, stft_, with_gradient);
    out.f_pam = pam.value;
    if (with_gradient) {
      for (std::size_t k = 0; k < delta.size(); ++k) out.grad[k] += lambda * pam.gradient[k];
    }
  } else {
    out.f_pam = FPam(delta, mask_, stft_);
  }
  out.value = lambda == 0.0 ? out.ctc_sum : out.ctc_sum + lambda * out.f_pam;
  return out;
}

MatchResult AttackProblem::CheckTotalMatch(std::span<const double> delta) const {
  Require(delta.size() == carrier_.size(), ErrorKind::kInvalidInput,
          "delta length does not match the carrier");
  const std::vector<double> x = QuantizeForExport(Add(carrier_, delta));
  const std::size_t n = channel_->rooms();
  const Pads pads = channel_->CanonicalPads();
  std::vector<double> losses(n, 0.0);
  MatchResult out;
  out.transcripts.resize(n);
  ParallelFor(n, [&](std::size_t room) {
    const auto y = channel_->Apply(x, room, pads);
    const Logits logits = recognizer_->ComputeLogits(y);
    out.transcripts[room] = GreedyDecode(logits, recognizer_->model().vocab());
    losses[room] = CtcLoss(logits, target_, false).loss;
  });
  for (std::size_t room = 0; room < n; ++room) {
    out.ctc_sum += losses[room];
    out.matches += out.transcripts[room] == target_text_;
  }
  out.all = out.matches == n;
  return out;
}

AttackResult GenerateAttack(const AttackProblem& problem, const AttackConfig& cfg,
                            const AttackHooks& hooks, std::optional<AttackState> resume) {
  cfg.Validate();
  Require(cfg.target == problem.target(), ErrorKind::kConfig,
          "attack config target differs from the problem target");
  const std::size_t n = problem.carrier().size();
  const std::size_t increments = cfg.LambdaIncrements();
  auto lambda_of = [&](std::size_t steps) {
    return std::min(static_cast<double>(steps) * cfg.lambda_step, cfg.lambda_max);
  };

  AttackState s;
  if (resume) {
    s = std::move(*resume);
    Require(s.delta.size() == n && s.m.size() == n && s.v.size() == n, ErrorKind::kInvalidInput,
            "checkpoint does not match the carrier length");
  } else {
    s.delta.resize(n);
    Rng rng = Rng::Substream(cfg.seed, kInitStream);
    for (double& d : s.delta) d = rng.Uniform(-cfg.init_range, cfg.init_range);
    s.m.assign(n, 0.0);
    s.v.assign(n, 0.0);
  }

  auto finish = [&](AttackStatus status) {
    AttackResult r;
    r.status = status;
    r.lambda = lambda_of(s.lambda_steps);
    r.best_match_lambda = s.best_match_lambda;
    r.iterations = s.iteration;
    r.delta = status == AttackStatus::kSuccess || s.best_delta.empty() ? s.delta : s.best_delta;
    r.x_prime = Add(problem.carrier(), r.delta);
    r.history = s.history;
    return r;
  };

  while (s.iteration < cfg.max_iterations) {
    const double lambda = lambda_of(s.lambda_steps);
    const LossValue loss = problem.CombinedLoss(s.delta, lambda, s.iteration, true);
    if (!std::isfinite(loss.value) || !AllFinite(loss.grad)) {
      std::ostringstream msg;
      msg << "non-finite loss or gradient at iteration " << s.iteration << " (lambda " << lambda
          << ", ctc_sum " << loss.ctc_sum << ", f_pam " << loss.f_pam << ", max|delta| "
          << MaxAbs(s.delta) << ")";
      if (!s.history.empty()) msg << "; last check at iteration " << s.history.back().iteration;
      Fail(ErrorKind::kNumeric, msg.str());
    }
    ++s.iteration;
    const double t = static_cast<double>(s.iteration);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = loss.grad[i];
      s.m[i] = cfg.beta1 * s.m[i] + (1.0 - cfg.beta1) * g;
      s.v[i] = cfg.beta2 * s.v[i] + (1.0 - cfg.beta2) * g * g;
      const double step = cfg.learning_rate * (s.m[i] / c1) / (std::sqrt(s.v[i] / c2) + cfg.epsilon);
      s.delta[i] = std::clamp(s.delta[i] - step, -cfg.clip, cfg.clip);
    }

    if (s.iteration % cfg.check_interval != 0) continue;
    const MatchResult match = problem.CheckTotalMatch(s.delta);
    const double f_pam = FPam(s.delta, problem.mask(), problem.stft());
    HistoryRecord rec{s.iteration, lambda, match.ctc_sum, f_pam, match.matches,
                      problem.channel().rooms()};
    s.history.push_back(rec);
    if (match.all) {
      if (lambda >= s.best_match_lambda) {
        s.best_match_lambda = lambda;
        s.best_delta = s.delta;
      }
    } else if (s.best_match_lambda < 0.0) {
      const double check_loss = match.ctc_sum + lambda * f_pam;
      if (s.best_delta.empty() || check_loss < s.best_loss) {
        s.best_loss = check_loss;
        s.best_delta = s.delta;
      }
    }
    if (hooks.on_check) hooks.on_check(rec);
    if (match.all) {
      if (s.lambda_steps >= increments) return finish(AttackStatus::kSuccess);
      ++s.lambda_steps;
    }
    if (hooks.checkpoint_every > 0 && hooks.on_checkpoint &&
        s.history.size() % hooks.checkpoint_every == 0) {
      hooks.on_checkpoint(s);
    }
  }
  return finish(AttackStatus::kBudgetExhausted);
}

void SaveAttackState(const std::string& path, const AttackState& s) {
  static_assert(std::endian::native == std::endian::little);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  Require(static_cast<bool>(out), ErrorKind::kIo, "cannot write checkpoint " + path);
  out.write(kStateMagic, 4);
  Put<std::uint32_t>(out, kStateVersion);
  Put<std::uint64_t>(out, s.iteration);
  Put<std::uint64_t>(out, s.lambda_steps);
  PutVector(out, s.delta);
  PutVector(out, s.m);
  PutVector(out, s.v);
  Put<std::uint64_t>(out, s.history.size());
  for (const HistoryRecord& h : s.history) {
    Put<std::uint64_t>(out, h.iteration);
    Put<double>(out, h.lambda);
    Put<double>(out, h.ctc_sum);
    Put<double>(out, h.f_pam);
    Put<std::uint64_t>(out, h.matches);
    Put<std::uint64_t>(out, h.total_rooms);
  }
  PutVector(out, s.best_delta);
  Put<double>(out, s.best_match_lambda);
  Put<double>(out, s.best_loss);
  Require(static_cast<bool>(out), ErrorKind::kIo, "failed writing checkpoint " + path);
}

AttackState LoadAttackState(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorKind::kIo, "cannot open checkpoint " + path);
  char magic[4] = {};
  in.read(magic, 4);
  Require(in && std::memcmp(magic, kStateMagic, 4) == 0, ErrorKind::kFormat,
          path + " is not an attack checkpoint");
  const auto version = Get<std::uint32_t>(in);
  Require(version == kStateVersion, ErrorKind::kFormat,
          "unsupported checkpoint version " + std::to_string(version));
  AttackState s;
  s.iteration = Get<std::uint64_t>(in);
  s.lambda_steps = Get<std::uint64_t>(in);
  s.delta = GetVector(in);
  s.m = GetVector(in);
  s.v = GetVector(in);
  const auto records = Get<std::uint64_t>(in);
  Require(records < (1ULL << 32), ErrorKind::kFormat, "checkpoint history too long");
  for (std::uint64_t i = 0; i < records; ++i) {
    HistoryRecord h;
    h.iteration = Get<std::uint64_t>(in);
    h.lambda = Get<double>(in);
    h.ctc_sum = Get<double>(in);
    h.f_pam = Get<double>(in);
    h.matches = Get<std::uint64_t>(in);
    h.total_rooms = Get<std::uint64_t>(in);
    s.history.push_back(h);
  }
  s.best_delta = GetVector(in);
  s.best_match_lambda = Get<double>(in);
  s.best_loss = Get<double>(in);
  Require(in.peek() == std::char_traits<char>::eof(), ErrorKind::kFormat,
          "trailing bytes in checkpoint");
  return s;
}

void WriteHistoryCsv(const std::string& path, std::span<const HistoryRecord> history) {
  std::ofstream out(path, std::ios::trunc);
  Require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path);
  out << "iteration,lambda,ctc_sum,f_pam,matches,total_rooms\n";
  char line[160];
  for (const HistoryRecord& h : history) {
    std::snprintf(line, sizeof line, "%zu,%.4f,%.9g,%.9g,%zu,%zu\n", h.iteration, h.lambda,
                  h.ctc_sum, h.f_pam, h.matches, h.total_rooms);
    out << line;
  }
  Require(static_cast<bool>(out), ErrorKind::kIo, "failed writing " + path);
}

ExportSummary ExportAttack(const AttackResult& result, const std::string& attack_path,
                           const std::string& delta_path) {
  ExportSummary s;
  s.clipped = WriteWav(attack_path, Waveform(result.x_prime));
  WriteWav(delta_path, Waveform(result.delta));
  return s;
}

}  // namespace overair
