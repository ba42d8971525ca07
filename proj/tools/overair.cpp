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


// overair: command-line front end for the attack pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "overair/error.hpp"
#include "overair/parallel.hpp"
#include "overair/pipeline.hpp"

namespace {

using overair::CommandArgs;
using overair::RunConfig;
using Command = nlohmann::ordered_json (*)(const RunConfig&, const CommandArgs&);

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated over-the-air adversarial audio pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::vector<std::string> overrides;
  CommandArgs args;
  app.add_option("--config", config_path, "Run config JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--threads", threads, "Worker thread cap")->check(CLI::Range(1, 1024));
  app.add_option("--set", overrides, "Config override section.key=value (repeatable)");
  app.add_option("--out", args.out_dir, "Output directory");

  Command command = nullptr;
  auto sub = [&](const char* name, const char* help, Command fn) {
    CLI::App* s = app.add_subcommand(name, help);
    s->callback([&command, fn] { command = fn; });
    return s;
  };

  auto* synth = sub("synth-corpus", "Render the synthetic training corpus", overair::CmdSynthCorpus);
  synth->add_option("--text", args.text, "Also render this transcript to carrier.wav");

  auto* train = sub("train-asr", "Train the toy recognizer", overair::CmdTrainAsr);
  train->add_option("--corpus", args.corpus_dir, "Corpus directory")->required();

  sub("make-rooms", "Generate the generation and held-out room sets", overair::CmdMakeRooms);

  auto* channel = sub("channel", "Pass a WAV through one simulated playback", overair::CmdChannel);
  channel->add_option("--in", args.input, "Input WAV")->required();
  channel->add_option("--rooms", args.rooms, "Rooms JSON")->required();
  channel->add_option("--room", args.room, "Generation room index");

  auto* attack = sub("attack", "Generate an adversarial perturbation", overair::CmdAttack);
  attack->add_option("--carrier", args.input, "Carrier WAV")->required();
  attack->add_option("--target", args.target, "Target transcript")->required();
  attack->add_option("--model", args.model, "Model file")->required();
  attack->add_option("--rooms", args.rooms, "Rooms JSON")->required();
  attack->add_option("--resume", args.resume, "Checkpoint to resume from");

  auto* evaluate = sub("evaluate", "Score an attack over held-out rooms", overair::CmdEvaluate);
  evaluate->add_option("--attack", args.attack, "Attack WAV")->required();
  evaluate->add_option("--target", args.target, "Target transcript")->required();
  evaluate->add_option("--model", args.model, "Model file")->required();
  evaluate->add_option("--rooms", args.rooms, "Rooms JSON")->required();
  evaluate->add_option("--carrier", args.carrier, "Benign carrier for the baseline row");

  auto* mask = sub("inspect-mask", "Export the carrier's masking thresholds as CSV",
                   overair::CmdInspectMask);
  mask->add_option("--carrier", args.input, "Carrier WAV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = overair::LoadRunConfig(config_path, overrides, seed);
    overair::SetMaxThreads(threads);
    const auto summary = command(cfg, args);
    std::cout << summary.dump() << std::endl;
    return 0;
  } catch (const overair::Error& e) {
    std::cerr << "overair: " << overair::ErrorKindName(e.kind()) << ": " << e.what() << "\n";
    return overair::ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "overair: " << e.what() << "\n";
    return 4;
  }
}
