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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "overair/attack.hpp"
#include "overair/channel.hpp"
#include "overair/error.hpp"
#include "overair/corpus.hpp"
#include "overair/metrics.hpp"
#include "overair/room.hpp"
#include "overair/train.hpp"

namespace overair {

// One document drives every command. Section seeds are derived from `seed`.
struct RunConfig {
  struct CorpusSection {
    std::string vocab = "abcdef";
    std::size_t count = 2200;
    std::size_t heldout = 200;  // last utterances, scored after training
    std::size_t min_len = 2;
    std::size_t max_len = 6;
    double snr_db = 30.0;
    double edge_pad_s = 0.05;
    double tone_amplitude = 0.1;
  } corpus;
  struct AsrSection {
    std::size_t hidden = 64;
    std::size_t epochs = 30;
    double learning_rate = 0.02;
    double momentum = 0.9;
    std::size_t batch_size = 16;
    double grad_clip = 5.0;
    std::size_t pad_max = 1600;
    double gain_min = 0.25;
    double gain_max = 2.0;
  } asr;
  struct RoomsSection {
    RoomTemplate base;
    std::size_t count = 30;
    double wall_jitter_m = 0.5;
    double position_jitter_m = 0.3;
    std::size_t max_order = 6;
    double max_seconds = 0.5;
  } rooms;
  struct AugmentSection {
    bool fr = true;
    bool rs = true;
    bool ts = true;
    std::size_t pad_max = 1600;
    std::size_t room_batch = 0;
    double fr_low_hz = 50.0;
    double fr_high_hz = 7900.0;
    std::size_t fr_taps = 511;
  } augment;
  struct AttackSection {
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
    std::size_t checkpoint_every = 10;  // checks; 0 disables
  } attack;
  struct EvalSection {
    std::size_t trials = 10;
    double heldout_fraction = 1.0 / 3.0;
  } eval;
  std::uint64_t seed = 1;

  // Throws kConfig on out-of-range values.
  void Validate() const;

  std::uint64_t SeedFor(const char* stage) const;
  Vocab MakeVocab() const;
  CorpusConfig MakeCorpusConfig() const;
  TrainConfig MakeTrainConfig() const;
  RoomGenConfig MakeRoomGenConfig() const;
  RirConfig MakeRirConfig() const;
  AugmentConfig MakeAugmentConfig() const;
  AttackConfig MakeAttackConfig(const std::string& target) const;
  EvalConfig MakeEvalConfig() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
// Missing keys keep their defaults; unknown keys throw kConfig.
void from_json(const nlohmann::json& j, RunConfig& c);

// Reads a config file (or defaults when `path` is empty), then applies
// "section.key=value" overrides. Values parse as JSON, falling back to a
// plain string.
RunConfig LoadRunConfig(const std::string& path, const std::vector<std::string>& overrides,
                        std::optional<std::uint64_t> seed = std::nullopt);

// Rooms file: the template, the generation set and the held-out set.
struct RoomSets {
  RoomTemplate base;
  std::vector<RoomVariant> generation;
  std::vector<RoomVariant> heldout;
};
RoomSets SplitRooms(const RunConfig& cfg);
void SaveRoomSets(const std::string& path, const RoomSets& sets);
RoomSets LoadRoomSets(const std::string& path);

// Workflow commands. Each writes into `out_dir` (created if needed) and
// returns the one-line summary the CLI prints.
struct CommandArgs {
  std::string out_dir = ".";
  std::string corpus_dir;
  std::string model;
  std::string rooms;
  std::string input;     // channel / attack carrier / mask carrier
  std::string attack;    // evaluate: attack WAV
  std::string carrier;   // evaluate: optional benign baseline
  std::string target;
  std::string text;      // synth-corpus: also render this transcript
  std::string resume;    // attack: checkpoint to continue from
  std::size_t room = 0;  // channel: generation-room index
};

nlohmann::ordered_json CmdSynthCorpus(const RunConfig& cfg, const CommandArgs& args);
nlohmann::ordered_json CmdTrainAsr(const RunConfig& cfg, const CommandArgs& args);
nlohmann::ordered_json CmdMakeRooms(const RunConfig& cfg, const CommandArgs& args);
nlohmann::ordered_json CmdChannel(const RunConfig& cfg, const CommandArgs& args);
nlohmann::ordered_json CmdAttack(const RunConfig& cfg, const CommandArgs& args);
nlohmann::ordered_json CmdEvaluate(const RunConfig& cfg, const CommandArgs& args);
nlohmann::ordered_json CmdInspectMask(const RunConfig& cfg, const CommandArgs& args);

// CLI exit status for a library error.
int ExitCodeFor(ErrorKind kind);

}  // namespace overair
