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

#ifndef KBSLOT_TRAINING_H_
#define KBSLOT_TRAINING_H_

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "kbslot/dataset.h"
#include "kbslot/model.h"

namespace kbslot {

// Lowercase words of a label or key; camel case, underscores, hyphens and
// whitespace all separate words ("WeatherLocationCity" -> weather location
// city).
std::vector<std::string> SplitWords(std::string_view text);

// max(token-set overlap coefficient, 1 - normalized edit distance).
double FuzzyMatch(std::string_view label, std::string_view key);
inline constexpr double kFuzzyThreshold = 0.5;
inline bool IsFuzzyMatch(std::string_view label, std::string_view key) {
  return FuzzyMatch(label, key) >= kFuzzyThreshold;
}

struct TargetDistribution {
  Vector values;             // uniform over `matched`, zero elsewhere
  std::vector<int> matched;  // key indices the label fuzzy-matches
};

// Throws Error(kLabelNotInKeys) when no key matches.
TargetDistribution BuildTarget(const KeyTensor &keys, const std::string &label);

// KL(target || predicted) = sum_i t_i log(t_i / y_i), with 0 log 0 = 0.
double KlLoss(const Vector &predicted, const TargetDistribution &target);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  int epochs = 50;
  int patience = 10;
  int batch_size = 16;
  AdamConfig adam;
  uint64_t seed = 1;
  // Keep parameters in full 64-bit precision instead of rounding them to
  // float32 after each step. Checkpoints only round-trip exactly when off.
  bool float64_params = false;
  double validation_fraction = 0.1;
  // Weight of the soft-gate term that trains tau.
  double gate_weight = 1.0;
  double tau_min = 0.01;
  double tau_max = 0.99;

  void Validate() const;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;       // mean KL over the training split, no dropout
  double validation_loss = 0.0;  // NaN when there is no validation split
  double tau = 0.0;
  int steps = 0;                 // optimizer steps taken so far
};

struct PreparedExample {
  PreparedInput input;
  TargetDistribution target;
  size_t source_index = 0;
};

// Lookup, key tensor, embedding and target for each example. Examples that
// cannot be resolved or whose label is outside the key namespace are
// skipped and counted.
std::vector<PreparedExample> PrepareExamples(const Resources &res,
                                             const ModelConfig &config,
                                             const std::vector<SlotExample> &examples,
                                             int *skipped = nullptr);

struct TrainResult {
  ResolverModel model;  // parameters from the best epoch
  int best_epoch = 0;
  std::vector<EpochMetrics> history;
  int skipped_examples = 0;
  int train_examples = 0;
  int validation_examples = 0;
  bool early_stopped = false;
};

using EpochCallback = std::function<void(const EpochMetrics &)>;

// Adam on mean KL per batch plus the gate term, early stopping on the
// validation loss (training loss when there is no validation split).
TrainResult Train(const ResolverModel &initial,
                  const std::vector<SlotExample> &dataset,
                  const TrainConfig &config, const Resources &res,
                  const EpochCallback &on_epoch = {});

// Same loop on already prepared examples.
TrainResult TrainPrepared(const ResolverModel &initial,
                          std::vector<PreparedExample> examples,
                          const TrainConfig &config,
                          const EpochCallback &on_epoch = {});

// Loss and parameter gradients of one example (dropout off, KL only).
double LossAndGradient(const ResolverModel &model, const PreparedExample &ex,
                       ResolverModel *grads);
double Loss(const ResolverModel &model, const PreparedExample &ex);

struct GradCheckResult {
  double max_relative_error = 0.0;
  int checked = 0;
  int absolute_fallbacks = 0;
};

// Compares analytic gradients with central differences of step h on a
// random sample of parameters. Where both gradients are below 1e-6 in
// magnitude the absolute error (required <= 1e-6) stands in for the ratio.
GradCheckResult GradCheck(const ResolverModel &model, const PreparedExample &ex,
                          double h, int samples = 50, uint64_t seed = 0);

}  // namespace kbslot

#endif  // KBSLOT_TRAINING_H_
