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

#include "wordnet.h"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kbslot/error.h"

namespace kbslot::cli {
namespace {

struct Synset {
  std::vector<std::string> lemmas;
  std::vector<std::string> parents;  // target offsets
};

std::string Lemma(std::string word) {
  // Adjective markers such as "(a)" only appear in data.adj; strip anyway.
  if (auto paren = word.find('('); paren != std::string::npos) word.resize(paren);
  for (char &ch : word) {
    ch = ch == '_' ? ' ' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return word;
}

}  // namespace

WordNetImportStats ImportWordNet(std::istream &in, std::ostream &out,
                                 const std::string &source,
                                 bool include_instances) {
  std::vector<std::string> order;
  std::unordered_map<std::string, Synset> synsets;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // The license header lines start with two spaces.
    if (line.empty() || line[0] == ' ') continue;
    if (auto bar = line.find(" | "); bar != std::string::npos) line.resize(bar);
    std::istringstream fields(line);
    std::string offset, lex_file, type, count_hex;
    if (!(fields >> offset >> lex_file >> type >> count_hex)) {
      throw ParseError(source, line_no, "truncated synset record");
    }
    Synset s;
    int words = 0;
    try {
      words = std::stoi(count_hex, nullptr, 16);
    } catch (const std::exception &) {
      throw ParseError(source, line_no, "bad word count '" + count_hex + "'");
    }
    for (int w = 0; w < words; ++w) {
      std::string word, lex_id;
      if (!(fields >> word >> lex_id)) throw ParseError(source, line_no, "truncated word list");
      s.lemmas.push_back(Lemma(word));
    }
    int pointers = 0;
    if (!(fields >> pointers)) throw ParseError(source, line_no, "missing pointer count");
    for (int p = 0; p < pointers; ++p) {
      std::string symbol, target, pos, src_tgt;
      if (!(fields >> symbol >> target >> pos >> src_tgt)) {
        throw ParseError(source, line_no, "truncated pointer list");
      }
      if (symbol == "@" || (include_instances && symbol == "@i")) {
        s.parents.push_back(target);
      }
    }
    order.push_back(offset);
    synsets.emplace(offset, std::move(s));
  }

  WordNetImportStats stats;
  stats.synsets = static_cast<int>(order.size());
  std::set<std::pair<std::string, std::string>> seen;
  out << "# child\tparent\n";
  for (const auto &offset : order) {
    const Synset &s = synsets.at(offset);
    for (const auto &target : s.parents) {
      auto it = synsets.find(target);
      if (it == synsets.end()) continue;
      for (const auto &child : s.lemmas) {
        for (const auto &parent : it->second.lemmas) {
          if (child == parent || !seen.insert({child, parent}).second) continue;
          out << child << '\t' << parent << '\n';
          ++stats.edges;
        }
      }
    }
  }
  return stats;
}

}  // namespace kbslot::cli
