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

#ifndef KBSLOT_SYNTHETIC_H_
#define KBSLOT_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace kbslot {

// Knobs for the generated evaluation world. The world has three knowledge
// bases (geography, personality, music), 22 slot types and templated
// utterances whose cue words sit close to their type in embedding space.
struct SyntheticOptions {
  uint64_t seed = 7;
  int embedding_dim = 50;
  int values_per_type = 4;
  // Share of values that also play a second role of another type.
  double second_role_fraction = 0.5;
  int contexts_per_role = 3;
};

// Text of every generated file, ready to be parsed or written out.
struct SyntheticFiles {
  std::vector<std::pair<std::string, std::string>> kb_files;  // name, body
  std::string taxonomy;
  std::string embeddings;
  std::string corpus;
  std::string hardcoded_map;
  std::vector<std::string> labels;
  int embedding_dim = 50;
};

SyntheticFiles GenerateSynthetic(const SyntheticOptions &options = {});

// Layout under dir: kb/<name>.kbl, taxonomy.tsv, embeddings.txt,
// corpus.jsonl and hm.tsv. Returns the written paths.
std::vector<std::filesystem::path> WriteSynthetic(
    const SyntheticFiles &files, const std::filesystem::path &dir);

}  // namespace kbslot

#endif  // KBSLOT_SYNTHETIC_H_
