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

#ifndef KBSLOT_TEXTENC_H_
#define KBSLOT_TEXTENC_H_

#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kbslot/tensor.h"

namespace kbslot {

// Lowercases, splits on whitespace, strips leading and trailing ASCII
// punctuation from each token and drops tokens that end up empty.
std::vector<std::string> Tokenize(std::string_view text);

// Tokenized input context.
struct ContextVector {
  std::vector<std::string> tokens;
};

ContextVector MakeContext(std::string_view text);

// Frozen pretrained word vectors in GloVe text format. Tokens that are not
// in the table embed to the zero vector.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim);

  static EmbeddingTable Load(const std::filesystem::path &path, int dim);
  static EmbeddingTable Parse(std::istream &in, int dim,
                              const std::string &source = "<stream>");

  // Later insertions of the same token overwrite earlier ones.
  void Insert(const std::string &token, std::span<const double> values);

  int dim() const { return dim_; }
  size_t size() const { return index_.size(); }
  bool Contains(const std::string &token) const;

  // Returns the stored vector or the zero vector for unknown tokens.
  Vector Lookup(const std::string &token) const;

  // Row i is the vector of tokens[i]. Throws on an empty token list.
  Matrix EmbedSequence(std::span<const std::string> tokens) const;

 private:
  int dim_;
  std::unordered_map<std::string, int> index_;
  std::vector<double> data_;  // row-major, size() x dim_
};

}  // namespace kbslot

#endif  // KBSLOT_TEXTENC_H_
