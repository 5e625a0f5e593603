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

#ifndef KBSLOT_EVALHARNESS_H_
#define KBSLOT_EVALHARNESS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "kbslot/dataset.h"
#include "kbslot/kbstore.h"
#include "kbslot/mlp_baseline.h"
#include "kbslot/model.h"
#include "kbslot/synthetic.h"
#include "kbslot/taxonomy.h"
#include "kbslot/textenc.h"
#include "kbslot/training.h"

namespace kbslot {

struct MapEntry {
  std::string source_domain;
  std::string source_key;
  std::string target_domain;
  std::string target_key;
};

// Hand-written cross-domain slot map. A lookup that is not in the table is
// a miss; the map never guesses.
class HardcodedMap {
 public:
  // source_domain<TAB>source_key<TAB>target_domain<TAB>target_key per line;
  // blank lines and '#' comments are skipped.
  static HardcodedMap Parse(std::istream &in, const std::string &source);
  static HardcodedMap Load(const std::filesystem::path &path);

  // Throws Error(kDuplicate) when (source_domain, source_key, target_domain)
  // is already mapped.
  void Add(const MapEntry &entry);

  std::optional<std::string> Resolve(const std::string &source_domain,
                                     const std::string &source_key,
                                     const std::string &target_domain) const;

  // Entries whose target key is in `keys`.
  HardcodedMap Restrict(const std::set<std::string> &keys) const;

  const std::vector<MapEntry> &entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

 private:
  std::vector<MapEntry> entries_;
  std::map<std::tuple<std::string, std::string, std::string>, size_t> index_;
};

// Everything an evaluation run reads.
struct EvalData {
  KbSet kbs;
  TaxonomyGraph taxonomy;
  EmbeddingTable embeddings{50};
  std::vector<SlotExample> corpus;
  HardcodedMap map;

  Resources resources() const { return {&kbs, &taxonomy, &embeddings}; }
};

struct EvalPaths {
  std::vector<std::filesystem::path> kbs;
  std::filesystem::path taxonomy;
  std::filesystem::path embeddings;
  std::filesystem::path corpus;
  std::filesystem::path map;
  int embedding_dim = 50;
};

EvalData LoadEvalData(const EvalPaths &paths);
EvalData ParseSyntheticData(const SyntheticFiles &files);

struct Candidate {
  size_t index = 0;  // position in the input list
  std::string value;
  std::string key;                    // argmax key
  std::vector<std::string> accepted;  // gated keys, argmax alone if none pass
};

struct CandidateFailure {
  size_t index = 0;
  std::string value;
  std::string reason;
};

struct CandidateSet {
  std::vector<Candidate> candidates;
  std::vector<CandidateFailure> failures;
};

// One candidate per resolvable (value, context); failures are collected,
// never thrown.
CandidateSet GenerateCandidates(
    const ResolverModel &model, const Resources &res,
    std::span<const std::pair<std::string, std::string>> values);

struct OovSplit {
  std::vector<std::string> train_keys;  // sorted
  std::vector<std::string> test_keys;   // sorted
  std::vector<std::string> unseen_keys; // test keys absent from training
  std::vector<SlotExample> train_examples;
  std::vector<SlotExample> test_examples;
  int oov_pct = 0;
  int k = 3;
  uint64_t seed = 0;
};

// A seeded third of the label vocabulary (at least one key) is a donor pool
// that always trains. Of the remaining evaluation keys, round(pct% of them)
// are withheld from training. Every training key contributes min(k,
// available) examples; the test set is the rest of the evaluation keys'
// examples.
OovSplit MakeOovSplit(const std::vector<SlotExample> &dataset, int oov_pct,
                      int k, uint64_t seed);

struct ScoreResult {
  double f1 = 0.0;        // percent
  double accuracy = 0.0;  // percent
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int total = 0;
};

// predictions[i] lists the keys emitted for gold[i]; empty means a miss.
// An emission is correct when every key in it fuzzy-matches the gold label.
// Correct: TP. Wrong: FP and FN. Miss: FN.
ScoreResult Score(std::span<const std::vector<std::string>> predictions,
                  std::span<const std::string> gold);

struct CompareConfig {
  std::vector<int> oov_settings = {0, 100};
  std::vector<uint64_t> seeds = {1, 2, 3};
  int k = 3;
  ModelConfig model;
  TrainConfig train;
  MlpConfig mlp;
  double mlp_negatives_ratio = 1.0;
};

struct CellResult {
  std::string strategy;
  int oov_pct = 0;
  std::vector<ScoreResult> runs;  // one per seed
  double f1_mean = 0.0, f1_std = 0.0;
  double accuracy_mean = 0.0, accuracy_std = 0.0;
  bool failed = false;
  std::string error;
};

struct CompareReport {
  std::vector<uint64_t> seeds;
  std::vector<CellResult> cells;  // strategy-major, then OOV setting

  const CellResult *Find(const std::string &strategy, int oov_pct) const;
  std::string ToJson() const;
  std::string ToTable() const;
};

using ProgressCallback = std::function<void(const std::string &)>;

// Emissions of the resolver trained on split.train_examples, aligned with
// split.test_examples. Unresolvable test values are misses.
std::vector<std::vector<std::string>> ResolverEmissions(
    const ResolverModel &model, const Resources &res,
    const std::vector<SlotExample> &test);
std::vector<std::vector<std::string>> MapEmissions(
    const HardcodedMap &map, const std::vector<SlotExample> &test);
std::vector<std::vector<std::string>> MlpEmissions(
    const MlpBaseline &mlp, const EmbeddingTable &emb,
    const HardcodedMap &map, const std::vector<SlotExample> &test);

std::vector<std::string> GoldLabels(const std::vector<SlotExample> &examples);

// Trains the resolver on a split and scores it on the test side.
ScoreResult EvaluateResolver(const EvalData &data, const OovSplit &split,
                             const ModelConfig &model, const TrainConfig &train,
                             uint64_t seed);

// Strategies "hm", "mlp" and "resolver" over every OOV setting and seed.
CompareReport CompareStrategies(const EvalData &data,
                                const CompareConfig &config,
                                const ProgressCallback &progress = {});

struct AblationVariant {
  std::string name;
  ModelConfig model;
};

struct AblationReport {
  std::vector<uint64_t> seeds;
  std::vector<int> oov_settings;
  // cells[v] holds one resolver cell per OOV setting for variants[v].
  std::vector<std::string> variants;
  std::vector<std::vector<CellResult>> cells;

  std::string ToJson() const;
  std::string ToTable() const;
};

// Every variant sees the same splits and seeds.
AblationReport RunAblation(const EvalData &data, const CompareConfig &config,
                           const std::vector<AblationVariant> &variants,
                           const ProgressCallback &progress = {});

}  // namespace kbslot

#endif  // KBSLOT_EVALHARNESS_H_
