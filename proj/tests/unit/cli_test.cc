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

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli/commands.h"
#include "cli/run_config.h"
#include "cli/wordnet.h"
#include "json.hpp"
#include "kbslot/error.h"
#include "test_util.h"

namespace kbslot::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json ReadJson(const fs::path &p) {
  std::ifstream in(p);
  return json::parse(in);
}

int RunBinary(const std::string &args, std::string *output = nullptr) {
  const fs::path log = kbslot::testing::TempDir("cli_log") / "out.txt";
  std::string cmd = std::string(KBSLOT_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(log);
    *output = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(RunConfigTest, DefaultsAndProfiles) {
  RunConfig desk = ParseRunConfig("profile: desk\n", "/base");
  EXPECT_EQ(desk.model.hidden_dim, 32);
  EXPECT_EQ(desk.model.bregman_dim, 64);
  EXPECT_EQ(desk.model.bregman_depth, 4);
  EXPECT_EQ(desk.model.embedding_dim, 50);
  EXPECT_DOUBLE_EQ(desk.model.tau_init, 0.75);
  EXPECT_EQ(desk.paths.output, fs::path("/base/out"));
  for (const char *text : {"{}", "profile: full\n"}) {
    RunConfig full = ParseRunConfig(text, "/base");
    EXPECT_EQ(full.profile, "full");
    EXPECT_EQ(full.model.embedding_dim, 400);
    EXPECT_EQ(full.model.hidden_dim, 200);
    EXPECT_EQ(full.model.bregman_dim, 512);
    EXPECT_EQ(full.model.bregman_depth, 10);
    EXPECT_DOUBLE_EQ(full.model.tau_init, desk.model.tau_init);
  }
}

TEST(RunConfigTest, SectionsAndRelativePaths) {
  RunConfig c = ParseRunConfig(
      "seed: 4\n"
      "paths:\n  taxonomy: data/tax.tsv\n  kbs: [a.kbl, /abs/b.kbl]\n"
      "model:\n  metric: sq_difference\n  threshold_enabled: false\n  tau: 0.5\n"
      "train:\n  epochs: 3\n"
      "eval:\n  oov: [25]\n  seeds: [9]\n",
      "/cfg");
  EXPECT_EQ(c.seed, 4u);
  EXPECT_EQ(c.paths.taxonomy, fs::path("/cfg/data/tax.tsv"));
  ASSERT_EQ(c.paths.kbs.size(), 2u);
  EXPECT_EQ(c.paths.kbs[1], fs::path("/abs/b.kbl"));
  EXPECT_EQ(c.model.metric, MetricKind::kSqDifference);
  EXPECT_FALSE(c.model.threshold_enabled);
  EXPECT_EQ(c.train.epochs, 3);
  EXPECT_EQ(c.eval.oov, std::vector<int>{25});
  EXPECT_EQ(c.eval.seeds, std::vector<uint64_t>{9});
}

TEST(RunConfigTest, BadDocumentsAreConfigErrors) {
  for (const char *text : {"model:\n  hiden_dim: 3\n", "colour: red\n", "profile: huge\n",
                           "model:\n  tau: 1.5\n", "model:\n  metric: cosine\n",
                           "paths: [1, 2]\n", "train:\n  epochs: abc\n"}) {
    try {
      RunConfig c = ParseRunConfig(text, "/x");
      c.model.Validate();
      FAIL() << text;
    } catch (const CliError &e) {
      EXPECT_EQ(e.exit_code(), kExitConfig) << text;
    } catch (const Error &) {
      // Invalid values may surface from the core validators.
    }
  }
}

TEST(RunConfigTest, YamlRoundTrip) {
  RunConfig c = ParseRunConfig("model:\n  epsilon: 0.02\ntrain:\n  learning_rate: 0.003\n", "/d");
  RunConfig again = ParseRunConfig(RunConfigToYaml(c), "/d");
  EXPECT_EQ(RunConfigToJson(c).dump(), RunConfigToJson(again).dump());
}

TEST(ValidateTest, MissingTaxonomyIsNamed) {
  RunConfig c = ParseRunConfig("paths:\n  taxonomy: nowhere.tsv\n  kbs: [" +
                                   kbslot::testing::Fixture("songs.kbl").string() + "]\n",
                               "/nonexistent");
  try {
    ValidateRunConfig(c, {});
    FAIL();
  } catch (const CliError &e) {
    EXPECT_EQ(e.exit_code(), kExitConfig);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/nowhere.tsv"), std::string::npos);
  }
}

TEST(ErrorRecordTest, SingleLineJson) {
  std::string line = ErrorRecord(3, "bad \"value\"\nsecond");
  EXPECT_EQ(line.find('\n'), std::string::npos);
  json j = json::parse(line);
  EXPECT_EQ(j["exit_code"], 3);
  EXPECT_EQ(j["error"], "data");
  EXPECT_EQ(j["message"], "bad \"value\"\nsecond");
  EXPECT_EQ(ExitCodeFor(CliError(64, "x")), 64);
  EXPECT_EQ(ExitCodeFor(Error(ErrorCode::kInvalidArgument, "x")), kExitConfig);
  EXPECT_EQ(ExitCodeFor(Error(ErrorCode::kUnresolvable, "x")), kExitData);
}

TEST(WordNetTest, ImportsHypernymPointers) {
  std::istringstream in(
      "  1 This software and database is being provided\n"
      "00001740 03 n 01 entity 0 000 | that which exists\n"
      "00002137 03 n 02 abstraction 0 abstract_entity 0 001 @ 00001740 n 0000 | x\n"
      "00003000 03 n 01 Paris 0 001 @i 00004000 n 0000 | capital\n"
      "00004000 03 n 01 national_capital 0 001 @ 00002137 n 0000 | y\n");
  std::ostringstream out;
  WordNetImportStats stats = ImportWordNet(in, out, "data.noun", true);
  EXPECT_EQ(stats.synsets, 4);
  const std::string edges = out.str();
  EXPECT_NE(edges.find("abstraction\tentity\n"), std::string::npos);
  EXPECT_NE(edges.find("abstract entity\tentity\n"), std::string::npos);
  EXPECT_NE(edges.find("paris\tnational capital\n"), std::string::npos);
  std::istringstream again(in.str());
  std::ostringstream no_instances;
  ImportWordNet(again, no_instances, "data.noun", false);
  EXPECT_EQ(no_instances.str().find("paris"), std::string::npos);
  std::istringstream tax(edges);
  EXPECT_EQ(TaxonomyGraph::Parse(tax, "wn").Hypernyms("paris", 9),
            (std::vector<std::string>{"national capital", "abstraction", "abstract entity", "entity"}));
}

// A small generated world with a tiny model, shared by the command tests.
class CommandTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(kbslot::testing::TempDir("commands"));
    std::ostringstream sink;
    GenFixturesOptions gen;
    gen.out = *dir_;
    gen.values_per_type = 2;
    gen.contexts_per_role = 1;
    ASSERT_EQ(RunGenFixtures(gen, sink), kExitOk);
    std::ofstream(*dir_ / "tiny.yaml")
        << "profile: desk\npaths:\n  kbs: [kb/geography.kbl, kb/personality.kbl, kb/music.kbl]\n"
           "  taxonomy: taxonomy.tsv\n  embeddings: embeddings.txt\n"
           "  dataset: corpus.jsonl\n  hm_table: hm.tsv\n  output: out\n"
           "model:\n  hidden_dim: 4\n  bregman_dim: 8\n  bregman_depth: 2\n"
           "train:\n  epochs: 2\n"
           "eval:\n  mlp_epochs: 5\n";
  }
  static void TearDownTestSuite() { delete dir_; }

  static CommonOptions Options(const std::string &out) {
    return {*dir_ / "tiny.yaml", *dir_ / out, std::nullopt};
  }

  static fs::path *dir_;
};
fs::path *CommandTest::dir_ = nullptr;

TEST_F(CommandTest, GenFixturesWritesConfigAndIndex) {
  EXPECT_TRUE(fs::exists(*dir_ / "config.yaml"));
  json index = ReadJson(*dir_ / "index.json");
  EXPECT_EQ(index["command"], "gen-fixtures");
  EXPECT_GE(index["artifacts"].size(), 7u);
  EXPECT_NO_THROW(LoadRunConfig(*dir_ / "config.yaml"));
}

TEST_F(CommandTest, TrainWritesCheckpointMetricsAndIndex) {
  std::ostringstream out;
  ASSERT_EQ(RunTrain(Options("train"), out), kExitOk);
  const fs::path run = *dir_ / "train";
  EXPECT_TRUE(fs::exists(run / "checkpoint" / "weights.bin"));
  json metrics = ReadJson(run / "metrics.json");
  EXPECT_EQ(metrics["history"].size(), 2u);
  EXPECT_EQ(metrics["config"]["model"]["hidden_dim"], 4);
  json index = ReadJson(run / "index.json");
  EXPECT_EQ(index["config"], metrics["config"]);

  std::ostringstream pred;
  PredictOptions p{run / "checkpoint", std::nullopt, "clint eastwood", "play it", true};
  ASSERT_EQ(RunPredict(p, pred), kExitOk);
  json j = json::parse(pred.str());
  EXPECT_FALSE(j["keys"].empty());
  EXPECT_EQ(j["value"], "clint eastwood");

  p.value = "zzqx";
  try {
    RunPredict(p, pred);
    FAIL();
  } catch (const std::exception &e) {
    EXPECT_EQ(ExitCodeFor(e), kExitData);
    EXPECT_NE(std::string(e.what()).find("empty lookup"), std::string::npos);
  }
}

TEST_F(CommandTest, CompareSingleSetting) {
  std::ostringstream out;
  CompareOptions o{Options("compare"), {0}, {1}};
  ASSERT_EQ(RunCompare(o, out), kExitOk);
  json report = ReadJson(*dir_ / "compare" / "compare.json");
  ASSERT_EQ(report["cells"].size(), 3u);
  for (const auto &cell : report["cells"]) EXPECT_EQ(cell["oov_pct"], 0);
  EXPECT_TRUE(report.contains("config"));
  std::ifstream table(*dir_ / "compare" / "compare.txt");
  std::string first;
  std::getline(table, first);
  EXPECT_EQ(first.rfind("# config: ", 0), 0u);
}

TEST_F(CommandTest, CompareSeedsGiveMeanAndSpread) {
  std::ostringstream out;
  CompareOptions o{Options("compare3"), {100}, {1, 2, 3}};
  ASSERT_EQ(RunCompare(o, out), kExitOk);
  json report = ReadJson(*dir_ / "compare3" / "compare.json");
  for (const auto &cell : report["cells"]) {
    EXPECT_EQ(cell["runs"].size(), 3u);
    EXPECT_TRUE(cell.contains("f1_std"));
  }
  EXPECT_NE(out.str().find("+/-"), std::string::npos);
}

TEST_F(CommandTest, AblateBothFlagsGiveFourCells) {
  std::ostringstream out;
  AblateOptions o{Options("ablate"), true, "sq_euclidean", {0}, {1}};
  ASSERT_EQ(RunAblate(o, out), kExitOk);
  json report = ReadJson(*dir_ / "ablate" / "ablation.json");
  ASSERT_EQ(report["variants"].size(), 4u);
  EXPECT_EQ(report["variants"][0], "base");
  EXPECT_EQ(report["deltas"].size(), 3u);
}

TEST_F(CommandTest, AblateFlagErrorsAreUsageErrors) {
  std::ostringstream out;
  AblateOptions none{Options("ablate_none"), false, std::nullopt, {0}, {1}};
  AblateOptions bad{Options("ablate_bad"), false, "cosine", {0}, {1}};
  for (const auto &o : {none, bad}) {
    try {
      RunAblate(o, out);
      FAIL();
    } catch (const std::exception &e) {
      EXPECT_EQ(ExitCodeFor(e), kExitUsage);
    }
  }
}

TEST_F(CommandTest, MissingTaxonomyExitsWithConfigError) {
  std::ofstream(*dir_ / "broken.yaml")
      << "profile: desk\npaths:\n  kbs: [kb/music.kbl]\n  taxonomy: gone.tsv\n"
         "  embeddings: embeddings.txt\n  dataset: corpus.jsonl\n";
  std::string output;
  EXPECT_EQ(RunBinary("train --config " + (*dir_ / "broken.yaml").string(), &output), 2);
  EXPECT_NE(output.find("gone.tsv"), std::string::npos) << output;
  EXPECT_NE(output.find("\"exit_code\":2"), std::string::npos) << output;
}

TEST_F(CommandTest, BinaryExitCodes) {
  std::string output;
  EXPECT_EQ(RunBinary("predict --checkpoint /nonexistent", &output), 64);
  EXPECT_NE(output.find("\"exit_code\":64"), std::string::npos) << output;
  EXPECT_EQ(RunBinary("frobnicate"), 64);
  EXPECT_EQ(RunBinary("--help"), 0);
  EXPECT_EQ(RunBinary("ablate --config " + (*dir_ / "tiny.yaml").string()), 64);
  EXPECT_EQ(RunBinary("compare --config " + (*dir_ / "tiny.yaml").string() + " --oov x"), 64);
}

}  // namespace
}  // namespace kbslot::cli
