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

#ifndef KBSLOT_TOOLS_CLI_WORDNET_H_
#define KBSLOT_TOOLS_CLI_WORDNET_H_

#include <istream>
#include <ostream>
#include <string>

namespace kbslot::cli {

struct WordNetImportStats {
  int synsets = 0;
  int edges = 0;
};

// Converts a WordNet database file (data.noun layout: offset, lex file,
// type, hex word count, words with lex ids, pointer count, pointers, gloss)
// into child<TAB>parent hypernym edges. Every lemma of a synset links to
// every lemma of each '@' (and, with instances, '@i') target. Lemmas are
// lowercased with underscores turned into spaces; duplicates are dropped.
WordNetImportStats ImportWordNet(std::istream &in, std::ostream &out,
                                 const std::string &source,
                                 bool include_instances = true);

}  // namespace kbslot::cli

#endif  // KBSLOT_TOOLS_CLI_WORDNET_H_
