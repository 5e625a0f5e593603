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

#ifndef KBSLOT_TAXONOMY_H_
#define KBSLOT_TAXONOMY_H_

#include <climits>
#include <filesystem>
#include <istream>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kbslot/kbstore.h"
#include "kbslot/tensor.h"

namespace kbslot {

// Hypernym graph over lowercase terms. Edges point from a child to its
// parents; parents keep declaration order. Immutable once loaded.
class TaxonomyGraph {
 public:
  // Edge-list format: "child<TAB>parent" per line, '#' starts a comment.
  static TaxonomyGraph Parse(std::istream &in, const std::string &source);
  static TaxonomyGraph Load(const std::filesystem::path &path);

  // Duplicate edges are ignored. Self loops throw.
  void AddEdge(const std::string &child, const std::string &parent);

  bool Contains(const std::string &term) const;
  size_t node_count() const { return names_.size(); }
  size_t edge_count() const { return edge_set_.size(); }
  const std::vector<std::string> &nodes() const { return names_; }

  // Direct parents of `term` in declaration order (empty when absent).
  std::vector<std::string> Parents(const std::string &term) const;

  // Breadth-first ancestors of `term`, nearest first, at most `m` of them
  // and none further than `max_depth` edges away.
  std::vector<std::string> Hypernyms(const std::string &term, int m,
                                     int max_depth = INT_MAX) const;

 private:
  int Intern(const std::string &term);

  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> names_;
  std::vector<std::vector<int>> parents_;
  std::set<std::pair<int, int>> edge_set_;
};

struct KeyOrigin {
  std::string kb_name;
  std::string field;  // empty when the key is the KB type itself
};

// Candidate slot keys for one value, unique and in first-appearance order,
// with each key's token span in the flattened key sequence.
struct KeyTensor {
  std::vector<std::string> keys;
  std::vector<std::vector<KeyOrigin>> origins;
  std::vector<std::string> tokens;
  std::vector<Span> spans;

  bool empty() const { return keys.empty(); }
  size_t size() const { return keys.size(); }
  int IndexOf(const std::string &key) const;
};

// For every matched KB: the KB name, then the hypernyms of each field term
// (at most m per term, within max_depth edges). Field terms are not keys
// themselves.
KeyTensor BuildKeyTensor(const FeatureTensor &features,
                         const TaxonomyGraph &graph, int m = 9,
                         int max_depth = 2);

}  // namespace kbslot

#endif  // KBSLOT_TAXONOMY_H_
