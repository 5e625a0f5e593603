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

#include "kbslot/textenc.h"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "kbslot/error.h"

namespace kbslot {

namespace {

bool IsAsciiPunct(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 128 && std::ispunct(u);
}

bool IsAsciiSpace(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 128 && std::isspace(u);
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsAsciiSpace(text[i])) ++i;
    size_t start = i;
    while (i < text.size() && !IsAsciiSpace(text[i])) ++i;
    size_t stop = i;
    while (start < stop && IsAsciiPunct(text[start])) ++start;
    while (stop > start && IsAsciiPunct(text[stop - 1])) --stop;
    if (start == stop) continue;
    std::string token(text.substr(start, stop - start));
    for (char &c : token) {
      auto u = static_cast<unsigned char>(c);
      if (u < 128) c = static_cast<char>(std::tolower(u));
    }
    tokens.push_back(std::move(token));
  }
  return tokens;
}

ContextVector MakeContext(std::string_view text) {
  return ContextVector{Tokenize(text)};
}

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim) {
  if (dim < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "embedding dimension must be positive");
  }
}

EmbeddingTable EmbeddingTable::Load(const std::filesystem::path &path,
                                    int dim) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kNotFound,
                "cannot open embeddings file " + path.string());
  }
  return Parse(in, dim, path.string());
}

EmbeddingTable EmbeddingTable::Parse(std::istream &in, int dim,
                                     const std::string &source) {
  EmbeddingTable table(dim);
  std::string line;
  std::vector<double> values;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;  // blank line
    values.clear();
    std::string number;
    while (fields >> number) {
      double v = 0.0;
      const char *first = number.data();
      const char *last = first + number.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last) {
        throw ParseError(source, line_no, "non-numeric value '" + number + "'");
      }
      values.push_back(v);
    }
    if (static_cast<int>(values.size()) != dim) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(dim) + " values, got " +
                           std::to_string(values.size()));
    }
    table.Insert(token, values);
  }
  return table;
}

void EmbeddingTable::Insert(const std::string &token,
                            std::span<const double> values) {
  if (static_cast<int>(values.size()) != dim_) {
    throw Error(ErrorCode::kShapeMismatch,
                "embedding for '" + token + "' has wrong length");
  }
  auto [it, inserted] = index_.try_emplace(token, static_cast<int>(size()));
  size_t offset = static_cast<size_t>(it->second) * dim_;
  if (inserted) data_.resize(data_.size() + dim_);
  std::copy(values.begin(), values.end(), data_.begin() + offset);
}

bool EmbeddingTable::Contains(const std::string &token) const {
  return index_.count(token) > 0;
}

Vector EmbeddingTable::Lookup(const std::string &token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return Vector::Zero(dim_);
  return Eigen::Map<const Vector>(data_.data() + size_t(it->second) * dim_,
                                  dim_);
}

Matrix EmbeddingTable::EmbedSequence(
    std::span<const std::string> tokens) const {
  if (tokens.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot embed an empty sequence");
  }
  Matrix out(tokens.size(), dim_);
  for (size_t i = 0; i < tokens.size(); ++i) {
    out.row(i) = Lookup(tokens[i]).transpose();
  }
  return out;
}

}  // namespace kbslot
