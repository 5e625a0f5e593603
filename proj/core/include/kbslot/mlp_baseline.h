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

#ifndef KBSLOT_MLP_BASELINE_H_
#define KBSLOT_MLP_BASELINE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kbslot/tensor.h"
#include "kbslot/textenc.h"

namespace kbslot {

// A labeled mapping example: does `source_key` holding `value` map onto
// `target_key`?
struct MapPair {
  std::string source_key;
  std::string value;
  std::string target_key;
};

struct MlpConfig {
  int hidden_dim = 64;
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 1e-2;
  double holdout_fraction = 0.2;
  uint64_t seed = 1;
};

// Two-layer binary mapper over the concatenated mean embeddings of the
// source key words, value tokens and candidate key words.
class MlpBaseline {
 public:
  MlpBaseline() = default;
  MlpBaseline(int input_dim, int hidden_dim, uint64_t seed);

  // Probability in (0, 1) that the mapping holds.
  double Score(const EmbeddingTable &emb, const MapPair &pair) const;
  double ScoreFeatures(const Vector &features) const;

  const Matrix &w1() const { return w1_; }
  const Matrix &b1() const { return b1_; }
  const Matrix &w2() const { return w2_; }
  const Matrix &b2() const { return b2_; }

 private:
  friend struct MlpTrainer;

  Matrix w1_, b1_, w2_, b2_;
};

Vector MlpFeatures(const EmbeddingTable &emb, const MapPair &pair);

struct MlpTrainResult {
  MlpBaseline model;
  double holdout_accuracy = 0.0;  // NaN when nothing was held out
  int positives = 0;
  int negatives = 0;
};

// Trains on the positives plus round(ratio * |positives|) negatives built by
// pairing sources with shuffled, mismatching target keys. Adam on binary
// cross-entropy; a seeded share of the pairs is held out for accuracy.
MlpTrainResult TrainMlp(std::span<const MapPair> positives,
                        double negatives_ratio, const MlpConfig &config,
                        const EmbeddingTable &emb);

}  // namespace kbslot

#endif  // KBSLOT_MLP_BASELINE_H_
