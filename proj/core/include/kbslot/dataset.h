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

#ifndef KBSLOT_DATASET_H_
#define KBSLOT_DATASET_H_

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace kbslot {

// One (value, context, label) record. The source/target fields are only
// present in evaluation corpora, where they drive the map baselines.
struct SlotExample {
  std::string value;
  std::string context;
  std::string label;
  std::string source_domain;
  std::string source_key;
  std::string target_domain;
};

std::vector<SlotExample> ParseDataset(std::istream &in,
                                      const std::string &source);
std::vector<SlotExample> LoadDataset(const std::filesystem::path &path);
void WriteDataset(std::ostream &out, const std::vector<SlotExample> &examples);

}  // namespace kbslot

#endif  // KBSLOT_DATASET_H_
