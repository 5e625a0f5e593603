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

#ifndef KBSLOT_KBSTORE_H_
#define KBSLOT_KBSTORE_H_

#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kbslot/tensor.h"

namespace kbslot {

// Attribute (name, value) pairs in declaration order.
using AttributeList = std::vector<std::pair<std::string, std::string>>;

// One field of an entry, e.g. "mayor" with {location: "Carmel-by-the-Sea"}.
struct KbField {
  std::string name;
  AttributeList attributes;
};

struct KbEntry {
  std::string kb_name;
  std::string entry_name;
  std::vector<std::string> aliases;
  std::vector<KbField> fields;
  double relevance = 0.0;
};

// A single file-backed knowledge base. Entries keep file order.
class KnowledgeBase {
 public:
  // Parses the line-delimited record format. Every record must carry the
  // same "kb" name; unknown record keys are rejected.
  static KnowledgeBase Parse(std::istream &in, const std::string &source);
  static KnowledgeBase Load(const std::filesystem::path &path);

  const std::string &name() const { return name_; }
  const std::vector<KbEntry> &entries() const { return entries_; }

  // Entry indices whose name or alias tokenizes to the same token sequence
  // as `value`, in file order.
  std::vector<int> Match(const std::string &value) const;

 private:
  void Add(KbEntry entry);

  std::string name_;
  std::vector<KbEntry> entries_;
  std::unordered_map<std::string, std::vector<int>> index_;
};

// Ordered set of semantically disjoint knowledge bases. Immutable after
// construction and safe to share between threads.
class KbSet {
 public:
  KbSet() = default;
  explicit KbSet(std::vector<KnowledgeBase> kbs);

  const std::vector<KnowledgeBase> &kbs() const { return kbs_; }
  size_t size() const { return kbs_.size(); }

 private:
  std::vector<KnowledgeBase> kbs_;
};

// Loads the files in argument order. Fails on an empty path list, a parse
// error or a kb name that appears in more than one file.
KbSet LoadKbSet(std::span<const std::filesystem::path> paths);

struct MatchedEntry {
  std::string entry_name;
  double relevance = 0.0;
  std::vector<KbField> fields;
};

struct KbSlice {
  std::string kb_name;
  std::vector<MatchedEntry> entries;  // relevance non-increasing
};

// Per-KB lookup result for one slot value. A KB without a match keeps its
// slot with an empty entry list.
struct FeatureTensor {
  std::vector<KbSlice> per_kb;

  bool empty() const;
  int field_count() const;
};

// Keeps at most n matches per KB, highest relevance first and file order
// among ties.
FeatureTensor Lookup(const KbSet &kbs, const std::string &value, int n = 10);

// Position of one field term in the flattened feature sequence.
struct FieldSpan {
  int kb = 0;
  int entry = 0;
  int field = 0;
  Span span;
};

struct FlatFeatures {
  std::vector<std::string> tokens;
  std::vector<FieldSpan> fields;
};

// Depth-first flattening: KB, entry, field name, then each attribute name
// followed by its value. All pieces are tokenized.
FlatFeatures FlattenFeatures(const FeatureTensor &features);

}  // namespace kbslot

#endif  // KBSLOT_KBSTORE_H_
