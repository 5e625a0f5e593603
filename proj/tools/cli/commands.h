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

#ifndef KBSLOT_TOOLS_CLI_COMMANDS_H_
#define KBSLOT_TOOLS_CLI_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "run_config.h"

namespace kbslot::cli {

// Shared overrides. Unset fields leave the config value alone.
struct CommonOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<uint64_t> seed;
};

struct PredictOptions {
  std::filesystem::path checkpoint;
  std::optional<std::filesystem::path> config;  // defaults to the echo
  std::string value;
  std::string context;
  bool json = false;
};

struct AblateOptions {
  CommonOptions common;
  bool no_threshold = false;
  std::optional<std::string> metric;
  std::vector<int> oov;
  std::vector<uint64_t> seeds;
};

struct CompareOptions {
  CommonOptions common;
  std::vector<int> oov;
  std::vector<uint64_t> seeds;
};

struct GenFixturesOptions {
  std::filesystem::path out;
  uint64_t seed = 7;
  int values_per_type = 4;
  int contexts_per_role = 3;
};

struct ImportWordNetOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  bool instances = true;
};

// Each command writes human-readable output to `out` and its artifacts
// under the output directory, and returns an exit code. Failures surface
// as CliError or kbslot::Error.
int RunTrain(const CommonOptions &options, std::ostream &out);
int RunPredict(const PredictOptions &options, std::ostream &out);
int RunAblate(const AblateOptions &options, std::ostream &out);
int RunCompare(const CompareOptions &options, std::ostream &out);
int RunGenFixtures(const GenFixturesOptions &options, std::ostream &out);
int RunImportWordNet(const ImportWordNetOptions &options, std::ostream &out);

// Exit code for an exception escaping a command.
int ExitCodeFor(const std::exception &e);
// Single-line JSON error record: {"error": category, "exit_code": n,
// "message": text}.
std::string ErrorRecord(int exit_code, const std::string &message);

}  // namespace kbslot::cli

#endif  // KBSLOT_TOOLS_CLI_COMMANDS_H_
