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

#include "kbslot/training.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kbslot/dataset.h"
#include "kbslot/error.h"
#include "test_util.h"

namespace kbslot {
namespace {

KeyTensor Keys(std::vector<std::string> names) {
  KeyTensor k;
  for (auto &n : names) {
    int begin = static_cast<int>(k.tokens.size());
    k.tokens.push_back(n);
    k.spans.push_back({begin, begin + 1});
    k.origins.emplace_back();
    k.keys.push_back(std::move(n));
  }
  return k;
}

TEST(SplitWordsTest, CamelCaseAndSeparators) {
  EXPECT_EQ(SplitWords("WeatherLocationCity"),
            (std::vector<std::string>{"weather", "location", "city"}));
  EXPECT_EQ(SplitWords("City_Weather"), (std::vector<std::string>{"city", "weather"}));
  EXPECT_EQ(SplitWords("musical composition"),
            (std::vector<std::string>{"musical", "composition"}));
}

TEST(FuzzyMatchTest, Examples) {
  EXPECT_DOUBLE_EQ(FuzzyMatch("City", "city"), 1.0);
  EXPECT_DOUBLE_EQ(FuzzyMatch("WeatherLocationCity", "city"), 1.0);
  EXPECT_TRUE(IsFuzzyMatch("WeatherLocationCity", "city"));
  EXPECT_LT(FuzzyMatch("Song", "company"), 0.5);
  EXPECT_NEAR(FuzzyMatch("Song", "company"), 1.0 - 5.0 / 7.0, 1e-12);
  EXPECT_FALSE(IsFuzzyMatch("Song", "company"));
}

TEST(BuildTargetTest, UniformOverMatches) {
  TargetDistribution t = BuildTarget(Keys({"city", "song", "actor"}), "City");
  EXPECT_EQ(t.values, Eigen::Vector3d(1, 0, 0));
  EXPECT_EQ(t.matched, std::vector<int>{0});
  TargetDistribution two =
      BuildTarget(Keys({"city", "music", "city area", "actor"}), "City");
  EXPECT_EQ(two.values, Eigen::Vector4d(0.5, 0, 0.5, 0));
  EXPECT_DOUBLE_EQ(two.values.sum(), 1.0);
}

TEST(BuildTargetTest, NoMatchIsReported) {
  try {
    BuildTarget(Keys({"song", "music"}), "Company");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kLabelNotInKeys);
  }
}

TargetDistribution Target(const Vector &v) {
  TargetDistribution t;
  t.values = v;
  for (int i = 0; i < v.size(); ++i) {
    if (v(i) > 0) t.matched.push_back(i);
  }
  return t;
}

TEST(KlLossTest, Examples) {
  EXPECT_EQ(KlLoss(Eigen::Vector2d(1, 0), Target(Eigen::Vector2d(1, 0))), 0.0);
  EXPECT_NEAR(KlLoss(Eigen::Vector2d(0.25, 0.75), Target(Eigen::Vector2d(0.5, 0.5))),
              0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-12);
  EXPECT_NEAR(KlLoss(Eigen::Vector2d(0.25, 0.75), Target(Eigen::Vector2d(0.5, 0.5))),
              0.1438, 1e-4);
  EXPECT_THROW(KlLoss(Eigen::Vector2d(1, 0), Target(Eigen::Vector2d(0.5, 0.5))), Error);
}

TEST(KlLossTest, NonNegativeOnRandomPairs) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vector y(5), t(5);
    for (int i = 0; i < 5; ++i) y(i) = u(rng), t(i) = trial % 2 ? u(rng) : (i < 2);
    y /= y.sum();
    t /= t.sum();
    EXPECT_GE(KlLoss(y, Target(t)), 0.0);
  }
}

class TrainingTest : public ::testing::Test {
 protected:
  void SetUp() override {
    data_ = LoadDataset(testing::Fixture("dataset.jsonl"));
    cfg_ = testing::TinyConfig();
    cfg_.recurrent_dropout = 0.0;
  }
  testing::FixtureWorld world_;
  std::vector<SlotExample> data_;
  ModelConfig cfg_;
};

TEST_F(TrainingTest, PrepareSkipsUnresolvableAndUnmatched) {
  int skipped = 0;
  auto prepared = PrepareExamples(world_.resources(), cfg_, data_, &skipped);
  EXPECT_EQ(skipped, 2);
  ASSERT_EQ(prepared.size(), 3u);
  EXPECT_EQ(prepared[0].source_index, 0u);
  EXPECT_GE(prepared[0].target.values(prepared[0].input.keys.IndexOf("song")), 0.5);
  EXPECT_EQ(prepared[2].source_index, 2u);
  for (const auto &ex : prepared) EXPECT_NEAR(ex.target.values.sum(), 1.0, 1e-12);
}

TEST_F(TrainingTest, AllUnusableIsAnError) {
  std::vector<SlotExample> bad = {data_[3], data_[4]};
  TrainConfig tc;
  tc.epochs = 1;
  EXPECT_THROW(Train(ResolverModel(cfg_, 1), bad, tc, world_.resources()), Error);
}

TEST_F(TrainingTest, GradientCheckOnTinyModel) {
  auto prepared = PrepareExamples(world_.resources(), cfg_, data_);
  ResolverModel model(cfg_, 2);
  for (const auto &ex : prepared) {
    GradCheckResult r = GradCheck(model, ex, 1e-4, 50, 7);
    EXPECT_EQ(r.checked, 50);
    EXPECT_LE(r.max_relative_error, 1e-3);
    GradCheckResult half = GradCheck(model, ex, 5e-5, 50, 7);
    EXPECT_LE(half.max_relative_error, 2.0 * r.max_relative_error + 1e-6);
  }
}

TEST_F(TrainingTest, LossDecreasesAndRunsAreDeterministic) {
  TrainConfig tc;
  tc.epochs = 15;
  tc.batch_size = 2;
  tc.adam.learning_rate = 1e-2;
  tc.validation_fraction = 0.0;
  TrainResult a = Train(ResolverModel(cfg_, 1), data_, tc, world_.resources());
  TrainResult b = Train(ResolverModel(cfg_, 1), data_, tc, world_.resources());
  ASSERT_EQ(a.history.size(), b.history.size());
  for (size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
    EXPECT_EQ(a.history[i].tau, b.history[i].tau);
  }
  EXPECT_EQ(a.skipped_examples, 2);
  EXPECT_EQ(a.train_examples, 3);
  EXPECT_LT(a.history.back().train_loss, a.history.front().train_loss);
  EXPECT_GE(a.history.back().tau, tc.tau_min);
  EXPECT_LE(a.history.back().tau, tc.tau_max);
}

TEST_F(TrainingTest, EarlyStoppingHonoursPatience) {
  TrainConfig tc;
  tc.epochs = 60;
  tc.patience = 3;
  tc.adam.learning_rate = 0.5;  // large steps make the loss bounce
  tc.validation_fraction = 0.0;
  TrainResult r = Train(ResolverModel(cfg_, 3), data_, tc, world_.resources());
  ASSERT_FALSE(r.history.empty());
  EXPECT_LE(static_cast<int>(r.history.size()), r.best_epoch + tc.patience);
  if (r.early_stopped) {
    EXPECT_EQ(static_cast<int>(r.history.size()), r.best_epoch + tc.patience);
  }
  double best = r.history[r.best_epoch - 1].train_loss;
  for (const auto &m : r.history) EXPECT_GE(m.train_loss, best);
}

TEST(TrainConfigTest, Validation) {
  TrainConfig tc;
  EXPECT_NO_THROW(tc.Validate());
  tc.patience = 0;
  EXPECT_THROW(tc.Validate(), Error);
  tc.patience = 1;
  tc.validation_fraction = 1.0;
  EXPECT_THROW(tc.Validate(), Error);
}

}  // namespace
}  // namespace kbslot
