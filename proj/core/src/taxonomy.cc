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

#include "kbslot/taxonomy.h"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>

#include "kbslot/error.h"
#include "kbslot/textenc.h"

namespace kbslot {
namespace {

std::string Normalize(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  for (char &c : s) {
    auto u = static_cast<unsigned char>(c);
    if (u < 128) c = static_cast<char>(std::tolower(u));
  }
  return s;
}

}  // namespace

TaxonomyGraph TaxonomyGraph::Parse(std::istream &in,
                                   const std::string &source) {
  TaxonomyGraph graph;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[line.find_first_not_of(" \t")] == '#') continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(source, line_no, "expected 'child<TAB>parent'");
    }
    std::string child = Normalize(line.substr(0, tab));
    std::string parent = Normalize(line.substr(tab + 1));
    if (child.empty() || parent.empty()) {
      throw ParseError(source, line_no, "empty term");
    }
    if (child == parent) {
      throw ParseError(source, line_no, "self-loop on '" + child + "'");
    }
    graph.AddEdge(child, parent);
  }
  return graph;
}

TaxonomyGraph TaxonomyGraph::Load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kNotFound,
                "cannot open taxonomy file " + path.string());
  }
  return Parse(in, path.string());
}

int TaxonomyGraph::Intern(const std::string &term) {
  auto [it, inserted] = ids_.try_emplace(term, static_cast<int>(names_.size()));
  if (inserted) {
    names_.push_back(term);
    parents_.emplace_back();
  }
  return it->second;
}

void TaxonomyGraph::AddEdge(const std::string &child,
                            const std::string &parent) {
  if (child == parent) {
    throw Error(ErrorCode::kInvalidArgument, "self-loop on '" + child + "'");
  }
  int c = Intern(child);
  int p = Intern(parent);
  if (edge_set_.emplace(c, p).second) parents_[c].push_back(p);
}

bool TaxonomyGraph::Contains(const std::string &term) const {
  return ids_.count(term) > 0;
}

std::vector<std::string> TaxonomyGraph::Parents(const std::string &term) const {
  std::vector<std::string> out;
  auto it = ids_.find(term);
  if (it == ids_.end()) return out;
  for (int p : parents_[it->second]) out.push_back(names_[p]);
  return out;
}

std::vector<std::string> TaxonomyGraph::Hypernyms(const std::string &term,
                                                  int m, int max_depth) const {
  if (m < 1) throw Error(ErrorCode::kInvalidArgument, "hypernyms needs m >= 1");
  std::vector<std::string> out;
  auto it = ids_.find(term);
  if (it == ids_.end()) return out;
  std::vector<char> seen(names_.size(), 0);
  seen[it->second] = 1;
  std::deque<std::pair<int, int>> queue = {{it->second, 0}};
  while (!queue.empty() && static_cast<int>(out.size()) < m) {
    auto [node, depth] = queue.front();
    queue.pop_front();
    if (depth >= max_depth) continue;
    for (int p : parents_[node]) {
      if (seen[p]) continue;
      seen[p] = 1;
      out.push_back(names_[p]);
      if (static_cast<int>(out.size()) == m) break;
      queue.emplace_back(p, depth + 1);
    }
  }
  return out;
}

int KeyTensor::IndexOf(const std::string &key) const {
  auto it = std::find(keys.begin(), keys.end(), key);
  return it == keys.end() ? -1 : static_cast<int>(it - keys.begin());
}

KeyTensor BuildKeyTensor(const FeatureTensor &features,
                         const TaxonomyGraph &graph, int m, int max_depth) {
  if (m < 1 || max_depth < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "key tensor needs m >= 1 and max_depth >= 1");
  }
  KeyTensor out;
  auto add = [&out](const std::string &key, KeyOrigin origin) {
    int index = out.IndexOf(key);
    if (index < 0) {
      index = static_cast<int>(out.keys.size());
      out.keys.push_back(key);
      out.origins.emplace_back();
    }
    out.origins[index].push_back(std::move(origin));
  };
  for (const auto &slice : features.per_kb) {
    if (slice.entries.empty()) continue;
    add(Normalize(slice.kb_name), {slice.kb_name, ""});
    for (const auto &entry : slice.entries) {
      for (const auto &field : entry.fields) {
        for (const auto &h : graph.Hypernyms(Normalize(field.name), m, max_depth)) {
          add(h, {slice.kb_name, field.name});
        }
      }
    }
  }
  for (const auto &key : out.keys) {
    int begin = static_cast<int>(out.tokens.size());
    std::vector<std::string> pieces = Tokenize(key);
    if (pieces.empty()) pieces.push_back(key);
    for (auto &piece : pieces) out.tokens.push_back(std::move(piece));
    out.spans.push_back({begin, static_cast<int>(out.tokens.size())});
  }
  return out;
}

}  // namespace kbslot
