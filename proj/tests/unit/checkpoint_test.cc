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

#include "kbslot/checkpoint.h"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "kbslot/error.h"
#include "json.hpp"
#include "test_util.h"

namespace kbslot {
namespace {

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ModelConfig cfg = testing::TinyConfig();
    cfg.metric = MetricKind::kBregman;
    checkpoint_.model = ResolverModel(cfg, 9);
    checkpoint_.model.set_tau(0.625);
    checkpoint_.seed = 9;
    checkpoint_.best_epoch = 2;
    checkpoint_.config_json = R"({"note":"unit"})";
    checkpoint_.history = {{1, 0.5, 0.6, 0.7, 3}, {2, 0.25, 0.3, 0.65, 6}};
    dir_ = testing::TempDir("checkpoint");
    SaveCheckpoint(checkpoint_, dir_);
  }

  void FlipBlobByte(std::streamoff offset) {
    std::fstream f(dir_ / "weights.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(offset);
    char c;
    f.get(c);
    f.seekp(offset);
    f.put(static_cast<char>(c ^ 0x5a));
  }

  Checkpoint checkpoint_;
  std::filesystem::path dir_;
};

TEST_F(CheckpointTest, RoundTripPreservesEverything) {
  Checkpoint loaded = LoadCheckpoint(dir_);
  EXPECT_EQ(loaded.seed, 9u);
  EXPECT_EQ(loaded.best_epoch, 2);
  EXPECT_EQ(nlohmann::json::parse(loaded.config_json)["note"], "unit");
  ASSERT_EQ(loaded.history.size(), 2u);
  EXPECT_EQ(loaded.history[1].train_loss, 0.25);
  EXPECT_EQ(loaded.model.tau(), 0.625);
  EXPECT_EQ(loaded.model.config().hidden_dim, 2);
  std::vector<Matrix> a, b;
  checkpoint_.model.ForEachTensor([&](const std::string &, const Matrix &m) { a.push_back(m); });
  loaded.model.ForEachTensor([&](const std::string &, const Matrix &m) { b.push_back(m); });
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST_F(CheckpointTest, RoundTripReproducesPredictions) {
  testing::FixtureWorld world;
  Checkpoint loaded = LoadCheckpoint(dir_);
  std::mt19937_64 rng(1);
  const std::vector<std::string> values = {"Clint Eastwood", "John Smith", "Boston",
                                           "Acme", "Feel Good Inc", "Rafi Mecartin"};
  const std::vector<std::string> words = {"play", "something", "by", "him", "star",
                                          "weather", "there", "zzqx", "movies"};
  for (int i = 0; i < 100; ++i) {
    std::string context;
    for (int w = 0; w < 1 + static_cast<int>(rng() % 5); ++w) {
      context += words[rng() % words.size()] + " ";
    }
    const std::string &value = values[rng() % values.size()];
    Prediction p = Predict(checkpoint_.model, world.resources(), value, context);
    Prediction q = Predict(loaded.model, world.resources(), value, context);
    EXPECT_EQ(p.probs, q.probs);
    EXPECT_EQ(p.accepted, q.accepted);
  }
}

TEST_F(CheckpointTest, CorruptedByteFailsChecksum) {
  FlipBlobByte(17);
  try {
    LoadCheckpoint(dir_);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kChecksum);
  }
}

TEST_F(CheckpointTest, TruncatedBlobIsRejected) {
  std::filesystem::resize_file(dir_ / "weights.bin",
                               std::filesystem::file_size(dir_ / "weights.bin") - 4);
  EXPECT_THROW(LoadCheckpoint(dir_), Error);
}

TEST_F(CheckpointTest, OldVersionIsRejected) {
  std::ifstream in(dir_ / "manifest.json");
  nlohmann::json manifest = nlohmann::json::parse(in);
  in.close();
  ASSERT_EQ(manifest["format_version"], kCheckpointVersion);
  manifest["format_version"] = kCheckpointVersion - 1;
  std::ofstream(dir_ / "manifest.json") << manifest.dump();
  try {
    LoadCheckpoint(dir_);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersion);
  }
}

TEST_F(CheckpointTest, SavingTwiceGivesIdenticalBytes) {
  auto other = testing::TempDir("checkpoint_again");
  SaveCheckpoint(checkpoint_, other);
  auto slurp = [](const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(dir_ / "weights.bin"), slurp(other / "weights.bin"));
  EXPECT_EQ(slurp(dir_ / "manifest.json"), slurp(other / "manifest.json"));
}

}  // namespace
}  // namespace kbslot
