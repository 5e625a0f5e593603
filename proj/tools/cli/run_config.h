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

#ifndef KBSLOT_TOOLS_CLI_RUN_CONFIG_H_
#define KBSLOT_TOOLS_CLI_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "kbslot/evalharness.h"
#include "kbslot/model.h"
#include "kbslot/training.h"

namespace kbslot::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitUsage = 64;

// A failure with a fixed exit code and error category.
class CliError : public std::runtime_error {
 public:
  CliError(int exit_code, const std::string &message)
      : std::runtime_error(message), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

struct RunPaths {
  std::vector<std::filesystem::path> kbs;
  std::filesystem::path taxonomy;
  std::filesystem::path embeddings;
  std::filesystem::path dataset;
  std::filesystem::path hm_table;
  std::filesystem::path output;
};

struct EvalSettings {
  std::vector<int> oov = {0, 100};
  std::vector<uint64_t> seeds = {1, 2, 3};
  int k = 3;
  MlpConfig mlp;
  double negatives_ratio = 1.0;
};

struct RunConfig {
  std::string profile = "desk";
  RunPaths paths;
  ModelConfig model;
  TrainConfig train;
  EvalSettings eval;
  uint64_t seed = 1;
};

// "full" (input 400, hidden 200, d_B 512, depth 10), the default for config
// files without a profile key, or "desk" (hidden 32, d_B 64, depth 4, 50-d
// embeddings). Both share the remaining defaults.
RunConfig ProfileDefaults(const std::string &profile);

// Reads a YAML document with optional sections paths, model, train, eval
// and top-level profile and seed. Relative paths resolve against the
// config file's directory. Unknown keys are rejected.
RunConfig LoadRunConfig(const std::filesystem::path &path);
RunConfig ParseRunConfig(const std::string &text,
                         const std::filesystem::path &base_dir,
                         const std::string &source = "<config>");

struct PathNeeds {
  bool dataset = false;
  bool hm_table = false;
};

// Throws CliError(kExitConfig) naming the first missing path or invalid
// value.
void ValidateRunConfig(const RunConfig &config, const PathNeeds &needs);

nlohmann::ordered_json RunConfigToJson(const RunConfig &config);
std::string RunConfigToYaml(const RunConfig &config);

CompareConfig MakeCompareConfig(const RunConfig &config);
EvalPaths MakeEvalPaths(const RunConfig &config);

}  // namespace kbslot::cli

#endif  // KBSLOT_TOOLS_CLI_RUN_CONFIG_H_
