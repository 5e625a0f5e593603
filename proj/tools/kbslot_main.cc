// Copyright 2026 The KbSlot Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// kbslot: train, query and evaluate knowledge-base slot resolvers.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli/commands.h"

namespace {

using namespace kbslot::cli;

void SetUpLogging() {
  auto logger = spdlog::stderr_color_mt("kbslot");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%l] %v");
  const char *env = std::getenv("KBSLOT_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
    if (level != "info") spdlog::warn("unknown KBSLOT_LOG level '{}', using info", level);
  }
}

void AddCommon(CLI::App *cmd, CommonOptions &o) {
  cmd->add_option("-c,--config", o.config, "Run configuration (YAML)")->required();
  cmd->add_option_function<std::string>(
      "--out", [&o](const std::string &v) { o.out = v; }, "Output directory");
  cmd->add_option_function<uint64_t>(
      "--seed", [&o](uint64_t v) { o.seed = v; }, "Random seed override");
}

}  // namespace

int main(int argc, char **argv) {
  SetUpLogging();
  CLI::App app{"Knowledge-base slot key resolver"};
  app.require_subcommand(1);

  CommonOptions train;
  CLI::App *train_cmd = app.add_subcommand("train", "Train a resolver and write a checkpoint");
  AddCommon(train_cmd, train);

  PredictOptions predict;
  CLI::App *predict_cmd = app.add_subcommand("predict", "Print the key distribution for a value");
  predict_cmd->add_option("--checkpoint", predict.checkpoint, "Checkpoint directory")->required();
  predict_cmd->add_option("--value", predict.value, "Slot value")->required();
  predict_cmd->add_option("--context", predict.context, "Utterance context");
  predict_cmd->add_option_function<std::string>(
      "-c,--config", [&predict](const std::string &v) { predict.config = v; },
      "Config whose paths replace the checkpoint echo");
  predict_cmd->add_flag("--json", predict.json, "Print one JSON object");

  AblateOptions ablate;
  CLI::App *ablate_cmd = app.add_subcommand("ablate", "Paired ablation against the base model");
  AddCommon(ablate_cmd, ablate.common);
  ablate_cmd->add_flag("--no-threshold", ablate.no_threshold, "Disable the tau gate");
  ablate_cmd->add_option_function<std::string>(
      "--metric", [&ablate](const std::string &v) { ablate.metric = v; },
      "bregman, sq_euclidean or sq_difference");
  ablate_cmd->add_option("--oov", ablate.oov, "OOV percentages")->delimiter(',');
  ablate_cmd->add_option("--seeds", ablate.seeds, "Seeds")->delimiter(',');

  CompareOptions compare;
  CLI::App *compare_cmd = app.add_subcommand("compare", "HM, MLP and resolver across OOV settings");
  AddCommon(compare_cmd, compare.common);
  compare_cmd->add_option("--oov", compare.oov, "OOV percentages")->delimiter(',');
  compare_cmd->add_option("--seeds", compare.seeds, "Seeds")->delimiter(',');

  GenFixturesOptions gen;
  CLI::App *gen_cmd = app.add_subcommand("gen-fixtures", "Write the synthetic evaluation world");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--values-per-type", gen.values_per_type, "Values per key");
  gen_cmd->add_option("--contexts-per-role", gen.contexts_per_role, "Utterances per role");

  ImportWordNetOptions wn;
  CLI::App *wn_cmd = app.add_subcommand("import-wordnet", "Convert WordNet data.noun to edges");
  wn_cmd->add_option("--input", wn.input, "WordNet data file")->required();
  wn_cmd->add_option("--output", wn.output, "Edge list to write")->required();
  wn_cmd->add_flag("!--no-instances", wn.instances, "Skip instance hypernyms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << ErrorRecord(kExitUsage, e.what()) << std::endl;
    return kExitUsage;
  }

  try {
    if (*train_cmd) return RunTrain(train, std::cout);
    if (*predict_cmd) return RunPredict(predict, std::cout);
    if (*ablate_cmd) return RunAblate(ablate, std::cout);
    if (*compare_cmd) return RunCompare(compare, std::cout);
    if (*gen_cmd) return RunGenFixtures(gen, std::cout);
    if (*wn_cmd) return RunImportWordNet(wn, std::cout);
  } catch (const std::exception &e) {
    const int code = ExitCodeFor(e);
    std::cerr << ErrorRecord(code, e.what()) << std::endl;
    return code;
  }
  return kExitUsage;
}
