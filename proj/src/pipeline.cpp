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


#include "overair/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "overair/error.hpp"
#include "overair/parallel.hpp"
#include "overair/psychoacoustic.hpp"
#include "overair/wav.hpp"

namespace overair {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

void RejectUnknown(const json& j, std::initializer_list<const char*> keys,
                   const std::string& where) {
  Require(j.is_object(), ErrorKind::kConfig,
          (where.empty() ? std::string("config") : where) + " must be an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(keys.begin(), keys.end(),
                                   [&](const char* k) { return item.key() == k; });
    const std::string name = where.empty() ? item.key() : where + "." + item.key();
    Require(known, ErrorKind::kConfig, "unknown config key '" + name + "'");
  }
}

template <typename T>
void Read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception&) {
    Fail(ErrorKind::kConfig, "bad value for '" + where + "." + key + "'");
  }
}

std::uint64_t Fnv1a(const char* s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (; *s; ++s) h = (h ^ static_cast<unsigned char>(*s)) * 0x100000001B3ULL;
  return h;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  Require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  Require(static_cast<bool>(out), ErrorKind::kIo, "write failed: " + path.string());
}

fs::path PrepareOut(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  Require(!ec, ErrorKind::kIo, "cannot create output directory " + dir);
  return fs::path(dir);
}

void RequireFile(const std::string& path, const char* what) {
  Require(!path.empty(), ErrorKind::kInvalidInput, std::string("missing ") + what + " path");
  Require(fs::is_regular_file(path), ErrorKind::kInvalidInput,
          std::string(what) + " not found: " + path);
}

std::vector<Rir> RirsOf(const std::vector<RoomVariant>& rooms, const RunConfig& cfg) {
  return ComputeRirs(rooms, cfg.MakeRirConfig());
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

void RunConfig::Validate() const {
  MakeVocab();
  Require(corpus.count > corpus.heldout && corpus.heldout >= 1, ErrorKind::kConfig,
          "corpus.heldout must be in [1, count)");
  Require(corpus.min_len >= 1 && corpus.min_len <= corpus.max_len, ErrorKind::kConfig,
          "corpus lengths must satisfy 1 <= min_len <= max_len");
  Require(corpus.tone_amplitude > 0.0 && corpus.edge_pad_s >= 0.0, ErrorKind::kConfig,
          "corpus amplitude and edge padding must be positive");
  Require(asr.hidden >= 1 && asr.batch_size >= 1, ErrorKind::kConfig,
          "asr.hidden and asr.batch_size must be positive");
  Require(rooms.count >= 2, ErrorKind::kConfig, "rooms.count must be at least 2");
  Require(rooms.max_seconds > 0.0, ErrorKind::kConfig, "rooms.max_seconds must be positive");
  rooms.base.Validate();
  Require(eval.trials >= 1, ErrorKind::kConfig, "eval.trials must be at least 1");
  Require(eval.heldout_fraction > 0.0 && eval.heldout_fraction < 1.0, ErrorKind::kConfig,
          "eval.heldout_fraction must be in (0, 1)");
  const std::size_t held = static_cast<std::size_t>(std::lround(rooms.count * eval.heldout_fraction));
  Require(held >= 1 && held < rooms.count, ErrorKind::kConfig,
          "held-out split leaves an empty room set");
  Require(augment.room_batch <= rooms.count - held, ErrorKind::kConfig,
          "augment.room_batch exceeds the generation rooms");
  Require(augment.fr_low_hz > 0.0 && augment.fr_low_hz < augment.fr_high_hz &&
              augment.fr_high_hz < kSampleRate / 2.0 && augment.fr_taps % 2 == 1,
          ErrorKind::kConfig, "augment filter band or taps invalid");
  AttackConfig a = MakeAttackConfig("x");
  a.Validate();
}

std::uint64_t RunConfig::SeedFor(const char* stage) const {
  return Rng::Mix(seed ^ Rng::Mix(Fnv1a(stage)));
}

Vocab RunConfig::MakeVocab() const {
  try {
    return Vocab(corpus.vocab);
  } catch (const Error& e) {
    Fail(ErrorKind::kConfig, std::string("corpus.vocab: ") + e.what());
  }
}

CorpusConfig RunConfig::MakeCorpusConfig() const {
  CorpusConfig c;
  c.count = corpus.count;
  c.min_len = corpus.min_len;
  c.max_len = corpus.max_len;
  c.snr_db = corpus.snr_db;
  c.edge_pad_s = corpus.edge_pad_s;
  c.tone_amplitude = corpus.tone_amplitude;
  c.seed = SeedFor("corpus");
  return c;
}

TrainConfig RunConfig::MakeTrainConfig() const {
  TrainConfig t;
  t.epochs = asr.epochs;
  t.learning_rate = asr.learning_rate;
  t.momentum = asr.momentum;
  t.batch_size = asr.batch_size;
  t.grad_clip = asr.grad_clip;
  t.pad_max = asr.pad_max;
  t.gain_min = asr.gain_min;
  t.gain_max = asr.gain_max;
  t.seed = SeedFor("train");
  return t;
}

RoomGenConfig RunConfig::MakeRoomGenConfig() const {
  RoomGenConfig g;
  g.count = rooms.count;
  g.wall_jitter_m = rooms.wall_jitter_m;
  g.position_jitter_m = rooms.position_jitter_m;
  g.seed = SeedFor("rooms");
  return g;
}

RirConfig RunConfig::MakeRirConfig() const {
  RirConfig r;
  r.max_order = rooms.max_order;
  r.max_seconds = rooms.max_seconds;
  return r;
}

AugmentConfig RunConfig::MakeAugmentConfig() const {
  AugmentConfig a;
  a.enable_fr = augment.fr;
  a.enable_rooms = augment.rs;
  a.enable_timeshift = augment.ts;
  a.pad_max = augment.pad_max;
  a.room_batch = augment.room_batch;
  a.fr_low_hz = augment.fr_low_hz;
  a.fr_high_hz = augment.fr_high_hz;
  a.fr_taps = augment.fr_taps;
  a.seed = SeedFor("augment");
  return a;
}

AttackConfig RunConfig::MakeAttackConfig(const std::string& target) const {
  AttackConfig a;
  a.target = target;
  a.lambda_step = attack.lambda_step;
  a.lambda_max = attack.lambda_max;
  a.check_interval = attack.check_interval;
  a.learning_rate = attack.learning_rate;
  a.max_iterations = attack.max_iterations;
  a.beta1 = attack.beta1;
  a.beta2 = attack.beta2;
  a.epsilon = attack.epsilon;
  a.clip = attack.clip;
  a.init_range = attack.init_range;
  a.seed = SeedFor("attack");
  return a;
}

EvalConfig RunConfig::MakeEvalConfig() const {
  EvalConfig e;
  e.trials = eval.trials;
  e.seed = SeedFor("eval");
  return e;
}

void to_json(json& j, const RunConfig& c) {
  j = {{"seed", c.seed},
       {"corpus",
        {{"vocab", c.corpus.vocab},
         {"count", c.corpus.count},
         {"heldout", c.corpus.heldout},
         {"min_len", c.corpus.min_len},
         {"max_len", c.corpus.max_len},
         {"snr_db", c.corpus.snr_db},
         {"edge_pad_s", c.corpus.edge_pad_s},
         {"tone_amplitude", c.corpus.tone_amplitude}}},
       {"asr",
        {{"hidden", c.asr.hidden},
         {"epochs", c.asr.epochs},
         {"learning_rate", c.asr.learning_rate},
         {"momentum", c.asr.momentum},
         {"batch_size", c.asr.batch_size},
         {"grad_clip", c.asr.grad_clip},
         {"pad_max", c.asr.pad_max},
         {"gain_min", c.asr.gain_min},
         {"gain_max", c.asr.gain_max}}},
       {"rooms",
        {{"template", c.rooms.base},
         {"count", c.rooms.count},
         {"wall_jitter_m", c.rooms.wall_jitter_m},
         {"position_jitter_m", c.rooms.position_jitter_m},
         {"max_order", c.rooms.max_order},
         {"max_seconds", c.rooms.max_seconds}}},
       {"augment",
        {{"fr", c.augment.fr},
         {"rs", c.augment.rs},
         {"ts", c.augment.ts},
         {"pad_max", c.augment.pad_max},
         {"room_batch", c.augment.room_batch},
         {"fr_low_hz", c.augment.fr_low_hz},
         {"fr_high_hz", c.augment.fr_high_hz},
         {"fr_taps", c.augment.fr_taps}}},
       {"attack",
        {{"lambda_step", c.attack.lambda_step},
         {"lambda_max", c.attack.lambda_max},
         {"check_interval", c.attack.check_interval},
         {"learning_rate", c.attack.learning_rate},
         {"max_iterations", c.attack.max_iterations},
         {"beta1", c.attack.beta1},
         {"beta2", c.attack.beta2},
         {"epsilon", c.attack.epsilon},
         {"clip", c.attack.clip},
         {"init_range", c.attack.init_range},
         {"checkpoint_every", c.attack.checkpoint_every}}},
       {"eval", {{"trials", c.eval.trials}, {"heldout_fraction", c.eval.heldout_fraction}}}};
}

void from_json(const json& j, RunConfig& c) {
  RejectUnknown(j, {"seed", "corpus", "asr", "rooms", "augment", "attack", "eval"}, "");
  RunConfig d;
  Read(j, "seed", d.seed, "config");
  if (j.contains("corpus")) {
    const auto& s = j.at("corpus");
    const std::string w = "corpus";
    RejectUnknown(s, {"vocab", "count", "heldout", "min_len", "max_len", "snr_db", "edge_pad_s",
                      "tone_amplitude"},
                  w);
    Read(s, "vocab", d.corpus.vocab, w);
    Read(s, "count", d.corpus.count, w);
    Read(s, "heldout", d.corpus.heldout, w);
    Read(s, "min_len", d.corpus.min_len, w);
    Read(s, "max_len", d.corpus.max_len, w);
    Read(s, "snr_db", d.corpus.snr_db, w);
    Read(s, "edge_pad_s", d.corpus.edge_pad_s, w);
    Read(s, "tone_amplitude", d.corpus.tone_amplitude, w);
  }
  if (j.contains("asr")) {
    const auto& s = j.at("asr");
    const std::string w = "asr";
    RejectUnknown(s, {"hidden", "epochs", "learning_rate", "momentum", "batch_size", "grad_clip",
                      "pad_max", "gain_min", "gain_max"},
                  w);
    Read(s, "hidden", d.asr.hidden, w);
    Read(s, "epochs", d.asr.epochs, w);
    Read(s, "learning_rate", d.asr.learning_rate, w);
    Read(s, "momentum", d.asr.momentum, w);
    Read(s, "batch_size", d.asr.batch_size, w);
    Read(s, "grad_clip", d.asr.grad_clip, w);
    Read(s, "pad_max", d.asr.pad_max, w);
    Read(s, "gain_min", d.asr.gain_min, w);
    Read(s, "gain_max", d.asr.gain_max, w);
  }
  if (j.contains("rooms")) {
    const auto& s = j.at("rooms");
    const std::string w = "rooms";
    RejectUnknown(s, {"template", "count", "wall_jitter_m", "position_jitter_m", "max_order",
                      "max_seconds"},
                  w);
    if (s.contains("template")) d.rooms.base = s.at("template").get<RoomTemplate>();
    Read(s, "count", d.rooms.count, w);
    Read(s, "wall_jitter_m", d.rooms.wall_jitter_m, w);
    Read(s, "position_jitter_m", d.rooms.position_jitter_m, w);
    Read(s, "max_order", d.rooms.max_order, w);
    Read(s, "max_seconds", d.rooms.max_seconds, w);
  }
  if (j.contains("augment")) {
    const auto& s = j.at("augment");
    const std::string w = "augment";
    RejectUnknown(s, {"fr", "rs", "ts", "pad_max", "room_batch", "fr_low_hz", "fr_high_hz",
                      "fr_taps"},
                  w);
    Read(s, "fr", d.augment.fr, w);
    Read(s, "rs", d.augment.rs, w);
    Read(s, "ts", d.augment.ts, w);
    Read(s, "pad_max", d.augment.pad_max, w);
    Read(s, "room_batch", d.augment.room_batch, w);
    Read(s, "fr_low_hz", d.augment.fr_low_hz, w);
    Read(s, "fr_high_hz", d.augment.fr_high_hz, w);
    Read(s, "fr_taps", d.augment.fr_taps, w);
  }
  if (j.contains("attack")) {
    const auto& s = j.at("attack");
    const std::string w = "attack";
    RejectUnknown(s, {"lambda_step", "lambda_max", "check_interval", "learning_rate",
                      "max_iterations", "beta1", "beta2", "epsilon", "clip", "init_range",
                      "checkpoint_every"},
                  w);
    Read(s, "lambda_step", d.attack.lambda_step, w);
    Read(s, "lambda_max", d.attack.lambda_max, w);
    Read(s, "check_interval", d.attack.check_interval, w);
    Read(s, "learning_rate", d.attack.learning_rate, w);
    Read(s, "max_iterations", d.attack.max_iterations, w);
    Read(s, "beta1", d.attack.beta1, w);
    Read(s, "beta2", d.attack.beta2, w);
    Read(s, "epsilon", d.attack.epsilon, w);
    Read(s, "clip", d.attack.clip, w);
    Read(s, "init_range", d.attack.init_range, w);
    Read(s, "checkpoint_every", d.attack.checkpoint_every, w);
  }
  if (j.contains("eval")) {
    const auto& s = j.at("eval");
    const std::string w = "eval";
    RejectUnknown(s, {"trials", "heldout_fraction"}, w);
    Read(s, "trials", d.eval.trials, w);
    Read(s, "heldout_fraction", d.eval.heldout_fraction, w);
  }
  c = d;
}

RunConfig LoadRunConfig(const std::string& path, const std::vector<std::string>& overrides,
                        std::optional<std::uint64_t> seed) {
  json doc = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    Require(static_cast<bool>(in), ErrorKind::kConfig, "cannot open config " + path);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      Fail(ErrorKind::kConfig, "config " + path + " is not valid JSON: " + e.what());
    }
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    Require(eq != std::string::npos && eq > 0, ErrorKind::kConfig,
            "override must look like section.key=value: " + o);
    const std::string key = o.substr(0, eq), text = o.substr(eq + 1);
    json value;
    try {
      value = json::parse(text);
    } catch (const json::parse_error&) {
      value = text;
    }
    json* node = &doc;
    std::size_t start = 0;
    for (;;) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot - start);
      Require(!part.empty(), ErrorKind::kConfig, "empty segment in override " + key);
      Require(node->is_object(), ErrorKind::kConfig, "override path is not an object: " + key);
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      node = &(*node)[part];
      if (node->is_null()) *node = json::object();
      start = dot + 1;
    }
  }
  if (seed) doc["seed"] = *seed;
  RunConfig cfg;
  try {
    cfg = doc.get<RunConfig>();
  } catch (const Error& e) {
    Fail(ErrorKind::kConfig, e.what());
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, e.what());
  }
  try {
    cfg.Validate();
  } catch (const Error& e) {
    Fail(ErrorKind::kConfig, e.what());
  }
  return cfg;
}

RoomSets SplitRooms(const RunConfig& cfg) {
  auto rooms = GenerateRooms(cfg.rooms.base, cfg.MakeRoomGenConfig());
  const std::size_t held =
      static_cast<std::size_t>(std::lround(cfg.rooms.count * cfg.eval.heldout_fraction));
  RoomSets sets;
  sets.base = cfg.rooms.base;
  const std::size_t gen = rooms.size() - held;
  sets.generation.assign(rooms.begin(), rooms.begin() + gen);
  sets.heldout.assign(rooms.begin() + gen, rooms.end());
  return sets;
}

void SaveRoomSets(const std::string& path, const RoomSets& sets) {
  ordered_json j;
  j["template"] = json(sets.base);
  j["generation"] = json(sets.generation);
  j["heldout"] = json(sets.heldout);
  WriteText(path, j.dump(2) + "\n");
}

RoomSets LoadRoomSets(const std::string& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorKind::kIo, "cannot open rooms file " + path);
  RoomSets sets;
  try {
    const json j = json::parse(in);
    Require(j.is_object() && j.contains("generation") && j.contains("heldout"),
            ErrorKind::kFormat, "rooms file needs generation and heldout lists");
    if (j.contains("template")) sets.base = j.at("template").get<RoomTemplate>();
    sets.generation = j.at("generation").get<std::vector<RoomVariant>>();
    sets.heldout = j.at("heldout").get<std::vector<RoomVariant>>();
  } catch (const json::exception& e) {
    Fail(ErrorKind::kFormat, "rooms file " + path + ": " + e.what());
  } catch (const Error& e) {
    Fail(ErrorKind::kFormat, "rooms file " + path + ": " + e.what());
  }
  Require(!sets.generation.empty() && !sets.heldout.empty(), ErrorKind::kFormat,
          "rooms file has an empty room set");
  for (const auto& g : sets.generation) {
    for (const auto& h : sets.heldout) {
      Require(g.id != h.id, ErrorKind::kFormat, "held-out rooms overlap generation rooms");
    }
  }
  return sets;
}

ordered_json CmdSynthCorpus(const RunConfig& cfg, const CommandArgs& args) {
  const Vocab vocab = cfg.MakeVocab();
  std::optional<Waveform> carrier;
  if (!args.text.empty()) {
    Rng rng(cfg.SeedFor("carrier"));
    carrier = RenderTranscript(vocab, args.text, cfg.MakeCorpusConfig(), rng);
  }
  const auto corpus = SynthCorpus(vocab, cfg.MakeCorpusConfig());
  const fs::path out = PrepareOut(args.out_dir);
  SaveCorpus((out / "corpus").string(), corpus);
  ordered_json s = {{"command", "synth-corpus"},
                    {"utterances", corpus.size()},
                    {"corpus", (out / "corpus").string()}};
  if (carrier) {
    WriteWav(out / "carrier.wav", *carrier);
    s["carrier"] = (out / "carrier.wav").string();
    s["carrier_text"] = args.text;
  }
  return s;
}

ordered_json CmdTrainAsr(const RunConfig& cfg, const CommandArgs& args) {
  Require(!args.corpus_dir.empty(), ErrorKind::kInvalidInput, "missing corpus directory");
  const auto corpus = LoadCorpus(args.corpus_dir);
  Require(corpus.size() > cfg.corpus.heldout, ErrorKind::kInvalidInput,
          "corpus smaller than the held-out count");
  const Vocab vocab = cfg.MakeVocab();
  for (const auto& u : corpus) vocab.Encode(u.transcript);
  const std::span<const Utterance> all(corpus);
  const auto train = all.first(all.size() - cfg.corpus.heldout);
  const auto heldout = all.last(cfg.corpus.heldout);

  ModelDims dims;
  dims.hidden = cfg.asr.hidden;
  dims.vocab = vocab.size();
  AcousticModel model(dims, vocab);
  {
    const Recognizer rec(model);
    std::vector<FeatureMatrix> features(train.size());
    ParallelFor(train.size(), [&](std::size_t i) {
      features[i] = rec.featurizer().Compute(train[i].audio.samples());
    });
    model.FitNormalization(features);
  }
  model.InitializeRandom(cfg.SeedFor("asr-init"));
  const TrainReport report = Train(model, train, heldout, cfg.MakeTrainConfig());
  const fs::path out = PrepareOut(args.out_dir);
  model.Save((out / "model.asrt").string());
  return {{"command", "train-asr"},
          {"model", (out / "model.asrt").string()},
          {"train_utterances", train.size()},
          {"heldout_utterances", heldout.size()},
          {"final_loss", report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back()},
          {"heldout_accuracy", report.heldout_accuracy}};
}

ordered_json CmdMakeRooms(const RunConfig& cfg, const CommandArgs& args) {
  const RoomSets sets = SplitRooms(cfg);
  const fs::path out = PrepareOut(args.out_dir);
  SaveRoomSets((out / "rooms.json").string(), sets);
  return {{"command", "make-rooms"},
          {"rooms", (out / "rooms.json").string()},
          {"generation", sets.generation.size()},
          {"heldout", sets.heldout.size()}};
}

ordered_json CmdChannel(const RunConfig& cfg, const CommandArgs& args) {
  RequireFile(args.input, "input WAV");
  RequireFile(args.rooms, "rooms file");
  const Waveform in = ReadWav(args.input);
  const RoomSets sets = LoadRoomSets(args.rooms);
  Require(args.room < sets.generation.size(), ErrorKind::kInvalidInput,
          "room index out of range");
  const std::vector<RoomVariant> one = {sets.generation[args.room]};
  const Channel channel(cfg.MakeAugmentConfig(), RirsOf(one, cfg), in.size());
  Rng rng(cfg.SeedFor("channel"));
  const ChannelOutput y = channel.Simulate(in.samples(), 0, rng);
  const fs::path out = PrepareOut(args.out_dir);
  const std::size_t clipped = WriteWav(out / "channel.wav", Waveform(y.audio));
  return {{"command", "channel"},
          {"output", (out / "channel.wav").string()},
          {"room_id", one[0].id},
          {"left_pad", y.pads.left},
          {"right_pad", y.pads.right},
          {"samples", y.audio.size()},
          {"clipped", clipped}};
}

ordered_json CmdAttack(const RunConfig& cfg, const CommandArgs& args) {
  RequireFile(args.input, "carrier WAV");
  RequireFile(args.model, "model");
  RequireFile(args.rooms, "rooms file");
  Require(!args.target.empty(), ErrorKind::kInvalidInput, "missing target transcript");
  const Waveform carrier = ReadWav(args.input);
  const AcousticModel model = AcousticModel::Load(args.model);
  const RoomSets sets = LoadRoomSets(args.rooms);
  std::optional<AttackState> resume;
  if (!args.resume.empty()) {
    RequireFile(args.resume, "checkpoint");
    resume = LoadAttackState(args.resume);
  }
  const Recognizer rec(model);
  const Channel channel(cfg.MakeAugmentConfig(), RirsOf(sets.generation, cfg), carrier.size());
  const AttackProblem problem(carrier.samples(), channel, rec, ComputeMaskingThresholds(carrier),
                              args.target);
  const AttackConfig acfg = cfg.MakeAttackConfig(args.target);

  const fs::path out = PrepareOut(args.out_dir);
  const std::string ckpt = (out / "attack.atks").string();
  AttackHooks hooks;
  hooks.checkpoint_every = cfg.attack.checkpoint_every;
  hooks.on_checkpoint = [&](const AttackState& s) { SaveAttackState(ckpt, s); };
  const AttackResult result = GenerateAttack(problem, acfg, hooks, resume);

  const ExportSummary ex = ExportAttack(result, (out / "attack.wav").string(),
                                        (out / "delta.wav").string());
  WriteHistoryCsv((out / "history.csv").string(), result.history);
  // The file on disk, not the in-memory x', is what gets played.
  const Waveform reloaded = ReadWav(out / "attack.wav");
  std::vector<double> delta_q(carrier.size());
  for (std::size_t i = 0; i < delta_q.size(); ++i) delta_q[i] = reloaded[i] - carrier[i];
  const MatchResult exported = problem.CheckTotalMatch(delta_q);

  ordered_json s = {{"command", "attack"},
                    {"status", AttackStatusName(result.status)},
                    {"target", args.target},
                    {"fr", cfg.augment.fr},
                    {"rs", cfg.augment.rs},
                    {"ts", cfg.augment.ts},
                    {"lambda", result.lambda},
                    {"lambda_max", cfg.attack.lambda_max},
                    {"best_match_lambda", result.best_match_lambda},
                    {"generation_iterations", result.iterations},
                    {"checks", result.history.size()},
                    {"generation_rooms", channel.rooms()},
                    {"clipped", ex.clipped},
                    {"exported_matches", exported.matches},
                    {"f_pam", FPam(result.delta, problem.mask())}};
  WriteText(out / "attack.json", s.dump(2) + "\n");
  return s;
}

namespace {

ordered_json ReportJson(const EvalReport& r) {
  ordered_json trials = ordered_json::array();
  for (const TrialResult& t : r.per_trial) {
    trials.push_back({{"room", t.room},
                      {"left_pad", t.pads.left},
                      {"right_pad", t.pads.right},
                      {"transcript", t.transcript},
                      {"success", t.success},
                      {"per", t.per},
                      {"wer", t.wer}});
  }
  return {{"trials", r.trials},
          {"successes", r.successes},
          {"success_rate", r.success_rate},
          {"per", r.per},
          {"wer", r.wer},
          {"per_trial", trials}};
}

}  // namespace

ordered_json CmdEvaluate(const RunConfig& cfg, const CommandArgs& args) {
  RequireFile(args.attack, "attack WAV");
  RequireFile(args.model, "model");
  RequireFile(args.rooms, "rooms file");
  Require(!args.target.empty(), ErrorKind::kInvalidInput, "missing target transcript");
  const Waveform attack = ReadWav(args.attack);
  std::optional<Waveform> carrier;
  if (!args.carrier.empty()) {
    RequireFile(args.carrier, "carrier WAV");
    carrier = ReadWav(args.carrier);
    Require(carrier->size() == attack.size(), ErrorKind::kInvalidInput,
            "carrier and attack lengths differ");
  }
  // Generation metadata, when the attack directory has it.
  ordered_json meta;
  const fs::path meta_path = fs::path(args.attack).parent_path() / "attack.json";
  if (fs::is_regular_file(meta_path)) {
    std::ifstream in(meta_path);
    try {
      meta = ordered_json::parse(in);
    } catch (const json::exception& e) {
      Fail(ErrorKind::kFormat, meta_path.string() + ": " + e.what());
    }
  }
  const AcousticModel model = AcousticModel::Load(args.model);
  const RoomSets sets = LoadRoomSets(args.rooms);
  const Recognizer rec(model);
  // Playback is always the full chain; the flags only shape generation.
  AugmentConfig full = cfg.MakeAugmentConfig();
  full.enable_fr = full.enable_rooms = full.enable_timeshift = true;
  full.room_batch = 0;
  const Channel channel(full, RirsOf(sets.heldout, cfg), attack.size());
  const EvalConfig ecfg = cfg.MakeEvalConfig();
  const EvalReport report = EvaluateAttack(attack.samples(), args.target, channel, rec, ecfg);

  auto flag = [&](const char* key, bool fallback) {
    return meta.contains(key) ? meta.at(key).get<bool>() : fallback;
  };
  const bool fr = flag("fr", cfg.augment.fr), rs = flag("rs", cfg.augment.rs),
             ts = flag("ts", cfg.augment.ts);
  const double lambda = meta.contains("lambda") ? meta.at("lambda").get<double>()
                                                : cfg.attack.lambda_max;
  const ordered_json iterations =
      meta.contains("generation_iterations") ? meta.at("generation_iterations") : ordered_json();

  ordered_json j = {{"channel", "simulated"},
                    {"per_definition", "character-level (toy vocabulary has no phoneme layer)"},
                    {"target", args.target},
                    {"fr", fr},
                    {"rs", rs},
                    {"ts", ts},
                    {"lambda", lambda},
                    {"generation_iterations", iterations},
                    {"heldout_rooms", channel.rooms()},
                    {"attack", ReportJson(report)}};
  if (carrier) {
    j["baseline"] = ReportJson(EvaluateAttack(carrier->samples(), args.target, channel, rec, ecfg));
  }
  const fs::path out = PrepareOut(args.out_dir);
  WriteText(out / "report.json", j.dump(2) + "\n");
  auto pm = [](bool b) { return b ? "+" : "-"; };
  std::string csv = "# channel=simulated; PER is character-level\n";
  csv += "FR,RS,TS,lambda,success_rate,PER,WER,generation_iterations\n";
  csv += std::string(pm(fr)) + "," + pm(rs) + "," + pm(ts) + "," + Fixed(lambda, 2) + "," +
         Fixed(report.success_rate, 4) + "," + Fixed(report.per, 4) + "," +
         Fixed(report.wer, 4) + "," + (iterations.is_null() ? "" : iterations.dump()) + "\n";
  WriteText(out / "report.csv", csv);

  ordered_json s = {{"command", "evaluate"},
                    {"report", (out / "report.json").string()},
                    {"trials", report.trials},
                    {"success_rate", report.success_rate},
                    {"per", report.per},
                    {"wer", report.wer}};
  if (carrier) s["baseline_wer"] = j["baseline"]["wer"];
  return s;
}

ordered_json CmdInspectMask(const RunConfig& cfg, const CommandArgs& args) {
  (void)cfg;
  RequireFile(args.input, "carrier WAV");
  const Waveform carrier = ReadWav(args.input);
  const MaskingThresholdMatrix m = ComputeMaskingThresholds(carrier);
  std::string csv;
  csv.reserve(m.frames * m.bins * 8);
  for (std::size_t f = 0; f < m.frames; ++f) {
    for (std::size_t k = 0; k < m.bins; ++k) {
      if (k) csv += ',';
      csv += Fixed(m.at(f, k), 3);
    }
    csv += '\n';
  }
  const fs::path out = PrepareOut(args.out_dir);
  WriteText(out / "mpam.csv", csv);
  return {{"command", "inspect-mask"},
          {"output", (out / "mpam.csv").string()},
          {"frames", m.frames},
          {"bins", m.bins}};
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return 2;
    case ErrorKind::kInvalidInput:
    case ErrorKind::kFormat:
    case ErrorKind::kIo:
      return 3;
    case ErrorKind::kGeneration:
    case ErrorKind::kTraining:
    case ErrorKind::kNumeric:
      return 4;
  }
  return 4;
}

}  // namespace overair
