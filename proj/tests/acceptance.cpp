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


// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and time
// limits are fixed below. Usage: acceptance <reference.json> <cli> <work dir>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "overair/attack.hpp"
#include "overair/ctc.hpp"
#include "overair/error.hpp"
#include "overair/features.hpp"
#include "overair/model.hpp"
#include "overair/parallel.hpp"
#include "overair/pipeline.hpp"
#include "overair/psychoacoustic.hpp"
#include "overair/room.hpp"
#include "overair/signal.hpp"
#include "overair/wav.hpp"
#include "test_util.hpp"

namespace {

namespace fs = std::filesystem;
using namespace overair;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

// Pinned tolerances and budgets.
constexpr double kCtcOracleRel = 1e-9;
constexpr std::size_t kCtcCases = 500;
constexpr double kCtcSeconds = 10.0;
constexpr std::size_t kGradCoords = 30;
constexpr double kGradPamRel = 1e-4;
constexpr double kGradFeaturizeRel = 1e-4;
constexpr double kGradNetworkRel = 1e-5;
constexpr double kGradCtcRel = 1e-5;
constexpr double kGradChannelRel = 1e-4;
constexpr double kGradCombinedRel = 1e-3;
constexpr double kGradSeconds = 120.0;
constexpr double kRirCenterSamples = 0.5;
constexpr double kRirAmplitudeRel = 0.01;
constexpr double kReciprocityAbs = 1e-9;
constexpr double kRirSeconds = 30.0;
constexpr double kToneElevationDb = 20.0;
constexpr double kMaskSeconds = 30.0;
constexpr double kPassbandDb = 1.0;
constexpr double kStopbandDb = 40.0;
constexpr double kFilterSeconds = 5.0;
constexpr double kAsrAccuracy = 0.95;
constexpr std::size_t kMaxIterations = 20000;
constexpr double kHeldoutSuccess = 0.5;
constexpr double kEndToEndSeconds = 7200.0;
constexpr double kSuperLinearFraction = 0.8;
constexpr std::size_t kAblationTrials = 20;

constexpr const char* kCarrierText = "cab";
constexpr const char* kTargetText = "fed";

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json ReadJson(const fs::path& p) { return json::parse(Slurp(p)); }

void Note(const std::string& s) {
  std::printf("# %s\n", s.c_str());
  std::fflush(stdout);
}

// ---------------------------------------------------------------- 1

Outcome CtcOracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> frames(1, 8), vocab(2, 4);
  std::normal_distribution<double> logit(0.0, 2.0);
  double worst = 0.0;
  std::size_t done = 0;
  while (done < kCtcCases) {
    const std::size_t T = frames(rng), V = vocab(rng);
    std::uniform_int_distribution<std::size_t> len(1, T), sym(1, V - 1);
    std::vector<int> target(len(rng));
    for (int& s : target) s = static_cast<int>(sym(rng));
    if (CtcMinFrames(target) > T) continue;
    Logits l{T, V, std::vector<double>(T * V)};
    for (double& v : l.data) v = logit(rng);
    const double expected = -std::log(testing::BruteForceProbability(l, target));
    const double got = CtcLoss(l, target, false).loss;
    worst = std::max(worst, std::abs(got - expected) / std::max(std::abs(expected), 1e-300));
    ++done;
  }
  const double secs = Seconds(t0);
  return {worst <= kCtcOracleRel && secs < kCtcSeconds,
          std::to_string(done) + " cases, worst rel " + Fmt("%.2e", worst) + " (tol " +
              Fmt("%.0e", kCtcOracleRel) + "), " + Fmt("%.2f", secs) + " s (limit " +
              Fmt("%.0f", kCtcSeconds) + " s)"};
}

// ---------------------------------------------------------------- 2

std::vector<double> Sine(double hz, std::size_t n, double amp) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = amp * std::sin(2.0 * std::numbers::pi * hz * i / kSampleRate);
  }
  return v;
}

double MaxAbs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct GradLine {
  const char* name;
  std::size_t checked;
  double worst;
  double tol;
};

AcousticModel SmallModel(std::uint64_t seed, std::size_t mels = 6, std::size_t hidden = 5) {
  ModelDims d;
  d.mels = mels;
  d.hidden = hidden;
  d.vocab = 4;
  AcousticModel m(d, Vocab("abc"));
  m.InitializeRandom(seed);
  auto& p = m.params();
  std::mt19937_64 rng(seed + 1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t i = 0; i < mels; ++i) {
    p[i] = n(rng);
    p[mels + i] = 0.5 + std::abs(n(rng));
  }
  return m;
}

double Linear(std::span<const double> a, std::span<const double> r) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * r[i];
  return s;
}

Outcome GradientIntegrity() {
  const auto t0 = Clock::now();
  std::vector<GradLine> lines;

  {  // f_PAM; coordinates whose stencil straddles a ReLU kink are skipped.
    auto carrier = Sine(800.0, 5000, 0.4);
    const auto hiss = testing::RandomVector(carrier.size(), 0.01, 3);
    for (std::size_t i = 0; i < carrier.size(); ++i) carrier[i] += hiss[i];
    const auto m = ComputeMaskingThresholds(Waveform(carrier));
    const auto delta = testing::RandomVector(carrier.size(), 0.02, 99);
    const auto eval = EvaluatePam(delta, m);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> pick(0, delta.size() - 1);
    GradLine g{"f_pam", 0, 0.0, kGradPamRel};
    for (int trial = 0; trial < 500 && g.checked < kGradCoords; ++trial) {
      const std::size_t i = pick(rng);
      const double h = 1e-7;
      auto plus = delta, minus = delta;
      plus[i] += h;
      minus[i] -= h;
      const double fp = FPam(plus, m), fm = FPam(minus, m);
      const double fd = (fp - fm) / (2 * h);
      const double left = (eval.value - fm) / h, right = (fp - eval.value) / h;
      if (std::abs(left - right) > 1e-3 * std::max(1.0, std::abs(fd))) continue;
      g.worst = std::max(g.worst,
                         std::abs(eval.gradient[i] - fd) / std::max(std::abs(fd), 1e-2));
      ++g.checked;
    }
    lines.push_back(g);
  }
  {  // featurize
    const Featurizer f;
    auto x = Sine(700.0, 3000, 0.3);
    const auto noise = testing::RandomVector(x.size(), 0.05, 3);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += noise[i];
    const auto f0 = f.Compute(x);
    const auto r = testing::RandomVector(f0.data.size(), 1.0, 4);
    FeatureMatrix g = f0;
    g.data = r;
    const auto grad = f.Backward(x, g);
    const auto c = testing::CheckGradient(
        [&](std::span<const double> s) { return Linear(f.Compute(s).data, r); }, x, grad,
        testing::RandomCoords(x.size(), kGradCoords, 5), 1e-6, 1e-3 * MaxAbs(grad));
    lines.push_back({"featurize", c.checked, c.worst_relative, kGradFeaturizeRel});
  }
  {  // network, inputs and trainable parameters
    auto m = SmallModel(5);
    FeatureMatrix feat{11, 6, testing::RandomVector(66, 1.0, 6)};
    AcousticModel::Activations cache;
    const auto l = m.Forward(feat, &cache);
    const auto r = testing::RandomVector(l.data.size(), 1.0, 7);
    std::vector<double> gp(m.params().size(), 0.0);
    const auto gx = m.Backward(cache, {l.frames, l.vocab, r}, &gp);
    const auto ci = testing::CheckGradient(
        [&](std::span<const double> x) {
          return Linear(m.Forward({11, 6, {x.begin(), x.end()}}).data, r);
        },
        feat.data, gx.data, testing::RandomCoords(feat.data.size(), kGradCoords, 8), 1e-6,
        1e-6);
    std::vector<std::size_t> coords;
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::size_t> pick(m.trainable_offset(), gp.size() - 1);
    for (std::size_t k = 0; k < kGradCoords; ++k) coords.push_back(pick(rng));
    const auto cp = testing::CheckGradient(
        [&](std::span<const double> p) {
          AcousticModel copy = m;
          copy.params().assign(p.begin(), p.end());
          return Linear(copy.Forward(feat).data, r);
        },
        m.params(), gp, coords, 1e-6, 1e-6);
    lines.push_back({"network", ci.checked + cp.checked,
                     std::max(ci.worst_relative, cp.worst_relative), kGradNetworkRel});
  }
  {  // CTC
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 2.0);
    Logits l{12, 5, std::vector<double>(60)};
    for (double& v : l.data) v = n(rng);
    const std::vector<int> target = {1, 3, 3, 2};
    const auto r = CtcLoss(l, target);
    const auto c = testing::CheckGradient(
        [&](std::span<const double> x) {
          Logits m = l;
          m.data.assign(x.begin(), x.end());
          return CtcLoss(m, target, false).loss;
        },
        l.data, r.grad.data, testing::RandomCoords(l.data.size(), kGradCoords, 12), 1e-5, 1e-6);
    lines.push_back({"ctc", c.checked, c.worst_relative, kGradCtcRel});
  }
  RoomGenConfig gen;
  gen.count = 3;
  RirConfig rc;
  rc.max_order = 3;
  const auto rirs = ComputeRirs(GenerateRooms(RoomTemplate{}, gen), rc);
  {  // composite channel
    const auto x = testing::RandomVector(1500, 0.3, 9);
    AugmentConfig ac;
    ac.pad_max = 200;
    const Channel ch(ac, rirs, x.size());
    const Pads p{120, 10};
    auto f = [&](std::span<const double> s) {
      double acc = 0.0;
      for (double v : ch.Apply(s, 0, p)) acc += v * v * v;
      return acc;
    };
    std::vector<double> dy = ch.Apply(x, 0, p);
    for (double& v : dy) v = 3.0 * v * v;
    const auto grad = ch.Adjoint(dy, 0, p);
    const auto c = testing::CheckGradient(f, x, grad, testing::RandomCoords(x.size(), 30, 3),
                                          1e-5, 1e-3 * MaxAbs(grad));
    lines.push_back({"channel", c.checked, c.worst_relative, kGradChannelRel});
  }
  {  // combined loss: 3 rooms, tiny model
    const Vocab vocab("abc");
    CorpusConfig cc;
    Rng rng(3);
    const auto carrier =
        QuantizeForExport(RenderTranscript(vocab, "ab", cc, rng).samples());
    AugmentConfig ac;
    ac.pad_max = 400;
    const Channel ch(ac, rirs, carrier.size());
    auto model = SmallModel(6, 40, 4);
    for (std::size_t i = 0; i < 40; ++i) {
      model.params()[i] = -8.0;
      model.params()[40 + i] = 6.0;
    }
    const Recognizer rec(model);
    const AttackProblem problem(carrier, ch, rec, ComputeMaskingThresholds(Waveform(carrier)),
                                "bc");
    const auto delta = testing::RandomVector(carrier.size(), 0.02, 8);
    const auto lv = problem.CombinedLoss(delta, 0.3, 11);
    const auto c = testing::CheckGradient(
        [&](std::span<const double> d) { return problem.CombinedLoss(d, 0.3, 11, false).value; },
        delta, lv.grad, testing::RandomCoords(delta.size(), kGradCoords, 9), 1e-6,
        1e-3 * MaxAbs(lv.grad));
    lines.push_back({"combined_loss", c.checked, c.worst_relative, kGradCombinedRel});
  }
  const double secs = Seconds(t0);
  bool ok = secs < kGradSeconds;
  std::string detail;
  for (const auto& g : lines) {
    ok = ok && g.checked >= kGradCoords && g.worst <= g.tol;
    detail += std::string(g.name) + " " + std::to_string(g.checked) + " coords worst " +
              Fmt("%.1e", g.worst) + "/" + Fmt("%.0e", g.tol) + "; ";
  }
  detail += Fmt("%.1f", secs) + " s (limit " + Fmt("%.0f", kGradSeconds) + " s)";
  return {ok, detail};
}

// ---------------------------------------------------------------- 3

Outcome RirCorrectness() {
  const auto t0 = Clock::now();
  bool ok = true;
  RoomTemplate dead;
  dead.dims = {8.0, 6.0, 4.0};
  dead.sofa = {{0.2, 0.2, 0.0}, {1.0, 0.5, 0.5}};
  dead.absorption.walls = {1.0, 1.0, 1.0, 1.0};
  dead.absorption.floor = dead.absorption.ceiling = dead.absorption.sofa = 1.0;
  dead.speaker = {1.0, 3.0, 2.0};
  dead.mic = {6.0, 3.0, 2.0};
  const double d = 5.0, center = d / 343.0 * kSampleRate;
  double worst_center = 0.0, worst_amp = 0.0;
  for (std::size_t order : {0u, 2u, 6u}) {
    RirConfig cfg;
    cfg.max_order = order;
    const auto rir = ComputeRir(dead, cfg);
    double best_t = 0.0, best = -1.0;
    for (double t = center - 10.0; t < center + 10.0; t += 0.005) {
      const double v = testing::Reconstruct(rir.taps, t);
      if (v > best) {
        best = v;
        best_t = t;
      }
    }
    worst_center = std::max(worst_center, std::abs(best_t - center));
    worst_amp = std::max(worst_amp, std::abs(best * d - 1.0));
    // Only the direct pulse: nothing after its 81-tap window.
    ok = ok && rir.taps.size() <= static_cast<std::size_t>(std::lround(center)) + 41;
  }
  ok = ok && worst_center <= kRirCenterSamples && worst_amp <= kRirAmplitudeRel;

  RoomTemplate room;
  room.absorption.walls = {0.1, 0.2, 0.3, 0.4};
  std::size_t mismatches = 0, listed = 0;
  for (int order = 0; order <= 2; ++order) {
    const auto oracle = testing::MirrorImages(room, order);
    const auto images = EnumerateImages(room, order);
    if (images.size() != oracle.size()) ++mismatches;
    for (const auto& img : images) {
      const auto it = oracle.find(std::make_tuple(std::lround(img.position.x * 1e6),
                                                  std::lround(img.position.y * 1e6),
                                                  std::lround(img.position.z * 1e6)));
      if (it == oracle.end() || it->second.order != img.order ||
          std::abs(it->second.gain - img.gain) > 1e-12) {
        ++mismatches;
      }
      ++listed;
    }
  }
  ok = ok && mismatches == 0;

  double recip = 0.0;
  RoomGenConfig gen;
  gen.count = 5;
  for (const auto& v : GenerateRooms(RoomTemplate{}, gen)) {
    RoomTemplate swapped = v.room;
    std::swap(swapped.speaker, swapped.mic);
    const auto a = ComputeRir(v.room), b = ComputeRir(swapped);
    if (a.taps.size() != b.taps.size()) {
      recip = INFINITY;
      break;
    }
    for (std::size_t n = 0; n < a.taps.size(); ++n) {
      recip = std::max(recip, std::abs(a.taps[n] - b.taps[n]));
    }
  }
  const double secs = Seconds(t0);
  ok = ok && recip <= kReciprocityAbs && secs < kRirSeconds;
  return {ok, "direct path center err " + Fmt("%.3f", worst_center) + " samples (tol " +
                  Fmt("%.1f", kRirCenterSamples) + "), amplitude err " +
                  Fmt("%.2e", worst_amp) + " (tol " + Fmt("%.2f", kRirAmplitudeRel) + "); " +
                  std::to_string(listed) + " images vs mirror listing, " +
                  std::to_string(mismatches) + " mismatches; reciprocity " +
                  Fmt("%.1e", recip) + " (tol " + Fmt("%.0e", kReciprocityAbs) + "); " +
                  Fmt("%.1f", secs) + " s"};
}

// ---------------------------------------------------------------- 4

Outcome MaskingSanity() {
  const auto t0 = Clock::now();
  const StftConfig cfg;
  bool silence_ok = true;
  {
    const auto m = ComputeMaskingThresholds(Waveform(std::vector<double>(4000, 0.0)), cfg);
    for (std::size_t f = 0; f < m.frames; ++f) {
      for (std::size_t k = 0; k < m.bins; ++k) {
        const double hz = std::clamp(k * 16000.0 / 512.0, 20.0, 8000.0);
        const double expected = std::clamp(testing::TerhardtOracle(hz), -20.0, 96.0);
        silence_ok = silence_ok && std::abs(m.at(f, k) - expected) <= 1e-12;
      }
    }
  }
  double min_elevation = INFINITY;
  {
    const auto m = ComputeMaskingThresholds(Waveform(Sine(1000.0, 8000, 1.0)), cfg);
    const double z0 = HzToBark(1000.0);
    for (std::size_t f = 1; f + 1 < m.frames; ++f) {
      for (std::size_t k = 1; k < m.bins; ++k) {
        const double hz = k * 16000.0 / 512.0;
        if (std::abs(HzToBark(hz) - z0) > 1.0) continue;
        min_elevation = std::min(min_elevation, m.at(f, k) - AbsoluteThreshold(hz));
      }
    }
  }
  double pam_zero = 0.0;
  {
    const auto x = Sine(440.0, 6000, 0.5);
    const auto m = ComputeMaskingThresholds(Waveform(x), cfg);
    pam_zero = FPam(std::vector<double>(x.size(), 0.0), m, cfg);
  }
  double worst_drop = 0.0;
  {
    const auto spec = Stft(Sine(1000.0, 8000, 0.8), cfg);
    const double ref = ReferenceDb(spec, cfg);
    const MaskerSet base = FindMaskers(spec, ref);
    const auto m1 = ThresholdsFromMaskers(base, spec.bins, spec.bin_hz, ref);
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      MaskerSet more = base;
      for (auto& frame : more) {
        frame.push_back({static_cast<std::size_t>(rng.UniformInt(1, 255)),
                         rng.Uniform(0.0, 90.0), trial % 2 == 0});
      }
      const auto m2 = ThresholdsFromMaskers(more, spec.bins, spec.bin_hz, ref);
      for (std::size_t i = 0; i < m1.db.size(); ++i) {
        worst_drop = std::max(worst_drop, m1.db[i] - m2.db[i]);
      }
    }
  }
  const double secs = Seconds(t0);
  const bool ok = silence_ok && min_elevation >= kToneElevationDb && pam_zero == 0.0 &&
                  worst_drop <= 1e-12 && secs < kMaskSeconds;
  return {ok, std::string("silence==clamped ATH: ") + (silence_ok ? "yes" : "no") +
                  "; min elevation within 1 bark " + Fmt("%.1f", min_elevation) + " dB (need " +
                  Fmt("%.0f", kToneElevationDb) + "); f_pam(0)=" + Fmt("%g", pam_zero) +
                  "; worst drop under added maskers " + Fmt("%.1e", worst_drop) + " dB; " +
                  Fmt("%.1f", secs) + " s"};
}

// ---------------------------------------------------------------- 5

Outcome FilterSpec() {
  const auto t0 = Clock::now();
  const auto k = DesignBandpass(50.0, 7900.0, kSampleRate, 511);
  double worst_pass = 0.0;
  for (double f = 100.0; f <= 0.9 * 7900.0; f += 5.0) {
    worst_pass = std::max(worst_pass,
                          std::abs(20 * std::log10(FirMagnitudeAt(k.taps, f, kSampleRate))));
  }
  const double at10 = -20 * std::log10(FirMagnitudeAt(k.taps, 10.0, kSampleRate));
  const double secs = Seconds(t0);
  return {worst_pass <= kPassbandDb && at10 >= kStopbandDb && secs < kFilterSeconds,
          "passband ripple " + Fmt("%.3f", worst_pass) + " dB over [100, 7110] Hz (tol " +
              Fmt("%.0f", kPassbandDb) + "), attenuation at 10 Hz " + Fmt("%.1f", at10) +
              " dB (need " + Fmt("%.0f", kStopbandDb) + "), " + Fmt("%.2f", secs) + " s"};
}

// ---------------------------------------------------------- pipeline helpers

struct Reference {
  RunConfig cfg;
  fs::path dir;
  CommandArgs args;
  double accuracy = 0.0;
  double train_seconds = 0.0;
};

RunConfig With(const RunConfig& base, const std::vector<std::string>& sets,
               const std::string& config_path) {
  RunConfig c = LoadRunConfig(config_path, sets);
  c.seed = base.seed;
  return c;
}

json RunAttack(const Reference& ref, const RunConfig& cfg, const std::string& target,
               const std::string& name) {
  CommandArgs a = ref.args;
  a.out_dir = (ref.dir / name).string();
  a.target = target;
  return CmdAttack(cfg, a);
}

json RunEvaluate(const Reference& ref, const RunConfig& cfg, const std::string& attack_dir,
                 const std::string& name, bool baseline) {
  CommandArgs a = ref.args;
  a.out_dir = (ref.dir / name).string();
  a.attack = (ref.dir / attack_dir / "attack.wav").string();
  a.carrier = baseline ? ref.args.input : "";
  a.target = kTargetText;
  CmdEvaluate(cfg, a);
  return ReadJson(ref.dir / name / "report.json");
}

// ---------------------------------------------------------------- 6

Outcome EndToEnd(const Reference& ref, double* seconds_out) {
  const auto t0 = Clock::now();
  const json s = RunAttack(ref, ref.cfg, kTargetText, "attack_all_on");
  const double attack_secs = Seconds(t0);
  const json r = RunEvaluate(ref, ref.cfg, "attack_all_on", "eval_all_on", true);
  const double total = ref.train_seconds + Seconds(t0);
  *seconds_out = total;
  const bool success = s["status"] == "success";
  const std::size_t iters = s["generation_iterations"];
  const double rate = r["attack"]["success_rate"], wer = r["attack"]["wer"];
  const double base_wer = r["baseline"]["wer"];
  const bool ok = ref.accuracy >= kAsrAccuracy && success && iters <= kMaxIterations &&
                  r["attack"]["trials"] == ref.cfg.eval.trials && rate >= kHeldoutSuccess &&
                  wer < base_wer && total <= kEndToEndSeconds;
  return {ok, "asr held-out accuracy " + Fmt("%.3f", ref.accuracy) + " (need " +
                  Fmt("%.2f", kAsrAccuracy) + "); attack " + s["status"].get<std::string>() +
                  " after " + std::to_string(iters) + " iterations (" +
                  Fmt("%.0f", attack_secs) + " s); held-out success " + Fmt("%.2f", rate) +
                  " over " + std::to_string(r["attack"]["trials"].get<int>()) +
                  " trials (need " + Fmt("%.1f", kHeldoutSuccess) + "); WER " +
                  Fmt("%.3f", wer) + " vs baseline " + Fmt("%.3f", base_wer) + "; total " +
                  Fmt("%.0f", total) + " s (limit " + Fmt("%.0f", kEndToEndSeconds) + " s)"};
}

// ---------------------------------------------------------------- 7

struct HistoryRow {
  std::size_t iteration, matches, total;
  double lambda;
};

std::vector<HistoryRow> ReadHistory(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<HistoryRow> rows;
  while (std::getline(in, line)) {
    HistoryRow r{};
    double ctc, pam;
    if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf,%zu,%zu", &r.iteration, &r.lambda, &ctc, &pam,
                    &r.matches, &r.total) == 6) {
      rows.push_back(r);
    }
  }
  return rows;
}

Outcome IterationGrowth(const Reference& ref, const std::string& config_path) {
  const RunConfig cfg = With(ref.cfg, {"attack.lambda_max=0.3"}, config_path);
  const json s = RunAttack(ref, cfg, kTargetText, "attack_lambda_0.3");
  // Cumulative iterations at each total match, i.e. at each lambda checkpoint.
  std::vector<std::size_t> reach;
  for (const auto& r : ReadHistory(ref.dir / "attack_lambda_0.3" / "history.csv")) {
    if (r.matches == r.total) reach.push_back(r.iteration);
  }
  std::string list;
  for (std::size_t i = 0; i < reach.size(); ++i) {
    list += (i ? "," : "") + std::to_string(reach[i]);
  }
  const std::size_t expected = cfg.MakeAttackConfig(kTargetText).LambdaIncrements() + 1;
  bool increasing = true;
  for (std::size_t i = 1; i < reach.size(); ++i) increasing = increasing && reach[i] > reach[i - 1];
  std::size_t pairs = 0, nondecreasing = 0;
  for (std::size_t i = 2; i < reach.size(); ++i) {
    ++pairs;
    nondecreasing += (reach[i] - reach[i - 1]) >= (reach[i - 1] - reach[i - 2]);
  }
  const double frac = pairs ? static_cast<double>(nondecreasing) / pairs : 0.0;
  const bool ok = s["status"] == "success" && reach.size() == expected && increasing &&
                  frac >= kSuperLinearFraction;
  return {ok, "status " + s["status"].get<std::string>() + "; iterations at lambda 0,0.05,..,0.3: " +
                  list + "; non-decreasing increments " + std::to_string(nondecreasing) + "/" +
                  std::to_string(pairs) + " (need " + Fmt("%.0f", kSuperLinearFraction * 100) +
                  "%)"};
}

// ---------------------------------------------------------------- 8

Outcome RoomAblation(const Reference& ref, const std::string& config_path) {
  const std::string trials = "eval.trials=" + std::to_string(kAblationTrials);
  const RunConfig all_on = With(ref.cfg, {trials}, config_path);
  const RunConfig rs_off = With(ref.cfg, {trials, "augment.rs=false"}, config_path);
  const json s = RunAttack(ref, rs_off, kTargetText, "attack_rs_off");
  const json on = RunEvaluate(ref, all_on, "attack_all_on", "eval20_all_on", false);
  const json off = RunEvaluate(ref, rs_off, "attack_rs_off", "eval20_rs_off", false);
  const double r_on = on["attack"]["success_rate"], r_off = off["attack"]["success_rate"];
  return {r_off < r_on && on["attack"]["trials"] == kAblationTrials,
          "held-out success over " + std::to_string(kAblationTrials) + " trials: RS- " +
              Fmt("%.2f", r_off) + " (generation " + s["status"].get<std::string>() + ", " +
              std::to_string(s["generation_iterations"].get<std::size_t>()) +
              " iterations) vs all-on " + Fmt("%.2f", r_on)};
}

// ---------------------------------------------------------------- 9

int RunCli(const std::string& cli, const std::string& args) {
  const int status = std::system((cli + " " + args + " > /dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome Determinism(const std::string& cli, const fs::path& work) {
  const std::string sets =
      " --seed 11 --set corpus.count=120 --set corpus.heldout=20 --set asr.epochs=3"
      " --set asr.hidden=16 --set rooms.count=9 --set rooms.max_order=3"
      " --set attack.max_iterations=60 --set attack.lambda_max=0.15";
  auto run = [&](const std::string& name, int threads) {
    const fs::path d = work / name;
    fs::remove_all(d);
    const std::string common = sets + " --threads " + std::to_string(threads) + " --out " +
                               d.string();
    const std::string m = (d / "model.asrt").string(), r = (d / "rooms.json").string();
    int rc = RunCli(cli, "synth-corpus --text cab" + common);
    rc |= RunCli(cli, "train-asr --corpus " + (d / "corpus").string() + common);
    rc |= RunCli(cli, "make-rooms" + common);
    rc |= RunCli(cli, "attack --carrier " + (d / "carrier.wav").string() + " --target fed" +
                          " --model " + m + " --rooms " + r + common);
    rc |= RunCli(cli, "evaluate --attack " + (d / "attack.wav").string() + " --carrier " +
                          (d / "carrier.wav").string() + " --target fed --model " + m +
                          " --rooms " + r + common);
    return std::make_pair(rc, d);
  };
  const auto a = run("determinism_a", 1), b = run("determinism_b", 1), c = run("determinism_c", 8);
  const bool ran = a.first == 0 && b.first == 0 && c.first == 0;
  std::size_t same = 0, compared = 0;
  for (const char* f : {"history.csv", "report.json", "report.csv", "attack.wav", "model.asrt"}) {
    const std::string x = Slurp(a.second / f);
    compared += 2;
    same += !x.empty() && x == Slurp(b.second / f);
    same += !x.empty() && x == Slurp(c.second / f);
  }
  return {ran && same == compared,
          std::string("CLI runs ") + (ran ? "ok" : "failed") + "; " + std::to_string(same) + "/" +
              std::to_string(compared) +
              " byte-identical artifact pairs (history.csv, report.json, report.csv, attack.wav, "
              "model.asrt; run vs rerun and --threads 1 vs 8)"};
}

// ---------------------------------------------------------------- 10

// Checks the schedule against a run's history: lambda only moves after a
// total match, by one step, and the run stops on the final match.
bool ScheduleConsistent(const std::vector<HistoryRow>& rows, double step, double max,
                        std::size_t* matches) {
  *matches = 0;
  for (const auto& r : rows) {
    const double expected = std::min(static_cast<double>(*matches) * step, max);
    // History stores lambda rounded to 4 decimals.
    if (std::abs(r.lambda - expected) > 5e-5) return false;
    *matches += r.matches == r.total;
  }
  return !rows.empty() && rows.back().matches == rows.back().total;
}

Outcome ScheduleContract(const Reference& ref, const std::string& config_path) {
  const RunConfig cfg = With(ref.cfg, {"attack.lambda_max=1.0", "attack.lambda_step=0.05"},
                             config_path);
  const std::size_t expected =
      static_cast<std::size_t>(std::ceil(cfg.attack.lambda_max / cfg.attack.lambda_step)) + 1;

  // Scripted: a recognizer whose output is fixed to the carrier's text, so
  // every check is a total match and the run is exactly `expected` checks.
  std::size_t scripted_checks = 0;
  bool scripted_ok = false;
  {
    const Vocab vocab = ref.cfg.MakeVocab();
    ModelDims d;
    d.hidden = 4;
    d.vocab = vocab.size();
    AcousticModel model(d, vocab);
    const int label = vocab.Encode("a")[0];
    model.params()[model.params().size() - d.vocab + label] = 5.0;
    const Recognizer rec(model);
    const Waveform carrier = ReadWav(ref.args.input);
    const RoomSets sets = LoadRoomSets(ref.args.rooms);
    const std::vector<RoomVariant> three(sets.generation.begin(), sets.generation.begin() + 3);
    const Channel ch(cfg.MakeAugmentConfig(), ComputeRirs(three, cfg.MakeRirConfig()),
                     carrier.size());
    const AttackProblem problem(carrier.samples(), ch, rec, ComputeMaskingThresholds(carrier),
                                "a");
    const AttackResult r = GenerateAttack(problem, cfg.MakeAttackConfig("a"));
    scripted_checks = r.history.size();
    std::size_t matched = 0;
    for (const auto& h : r.history) matched += h.matches == h.total_rooms;
    scripted_ok = r.status == AttackStatus::kSuccess && scripted_checks == expected &&
                  matched == expected && r.lambda == 1.0;
  }

  // The trained recognizer with t' set to the carrier's transcription.
  const json s = RunAttack(ref, cfg, kCarrierText, "attack_identity");
  std::size_t matches = 0;
  const bool consistent =
      ScheduleConsistent(ReadHistory(ref.dir / "attack_identity" / "history.csv"),
                         cfg.attack.lambda_step, cfg.attack.lambda_max, &matches);
  const bool trained_ok = s["status"] == "success" && matches == expected && consistent &&
                          s["lambda"] == 1.0;
  return {scripted_ok && trained_ok,
          "scripted recognizer: " + std::to_string(scripted_checks) + " checks, all total " +
              "matches (expected " + std::to_string(expected) + "); trained recognizer, t' = '" +
              std::string(kCarrierText) + "': " + s["status"].get<std::string>() + ", " +
              std::to_string(matches) + " total-match checks of " +
              std::to_string(s["checks"].get<std::size_t>()) + " (expected " +
              std::to_string(expected) + "), schedule " +
              (consistent ? "consistent" : "inconsistent") + " with history"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::fprintf(stderr, "usage: acceptance <reference.json> <cli> <work dir>\n");
    return 2;
  }
  const std::string config_path = argv[1], cli = argv[2];
  const fs::path work = argv[3];
  fs::create_directories(work);

  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& body) {
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %2d %-22s %s  %s\n", id, name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "ctc-oracle", CtcOracle);
  report(2, "gradient-integrity", GradientIntegrity);
  report(3, "rir-correctness", RirCorrectness);
  report(4, "masking-sanity", MaskingSanity);
  report(5, "filter-spec", FilterSpec);

  // Reference pipeline shared by criteria 6, 7, 8 and 10.
  Reference ref;
  std::string setup_error;
  try {
    ref.cfg = LoadRunConfig(config_path, {});
    ref.dir = work / "reference";
    fs::remove_all(ref.dir);
    ref.args.out_dir = ref.dir.string();
    ref.args.text = kCarrierText;
    Note("reference run: synthesizing corpus");
    CmdSynthCorpus(ref.cfg, ref.args);
    ref.args.corpus_dir = (ref.dir / "corpus").string();
    Note("reference run: training recognizer");
    const auto t0 = Clock::now();
    const json trained = CmdTrainAsr(ref.cfg, ref.args);
    ref.train_seconds = Seconds(t0);
    ref.accuracy = trained["heldout_accuracy"];
    Note("recognizer held-out accuracy " + Fmt("%.3f", ref.accuracy) + " after " +
         Fmt("%.0f", ref.train_seconds) + " s");
    CmdMakeRooms(ref.cfg, ref.args);
    ref.args.model = (ref.dir / "model.asrt").string();
    ref.args.rooms = (ref.dir / "rooms.json").string();
    ref.args.input = (ref.dir / "carrier.wav").string();
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  auto needs_ref = [&](const std::function<Outcome()>& body) {
    return [&, body]() -> Outcome {
      if (!setup_error.empty()) return {false, "reference setup failed: " + setup_error};
      return body();
    };
  };

  double e2e_seconds = 0.0;
  report(6, "end-to-end-attack", needs_ref([&] { return EndToEnd(ref, &e2e_seconds); }));
  report(7, "iteration-growth", needs_ref([&] { return IterationGrowth(ref, config_path); }));
  report(8, "room-sim-ablation", needs_ref([&] { return RoomAblation(ref, config_path); }));
  report(9, "determinism", [&] { return Determinism(cli, work); });
  report(10, "lambda-schedule", needs_ref([&] { return ScheduleContract(ref, config_path); }));

  std::printf("acceptance: %d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
