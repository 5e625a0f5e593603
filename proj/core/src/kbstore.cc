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

#include "kbslot/kbstore.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"
#include "kbslot/error.h"
#include "kbslot/textenc.h"

namespace kbslot {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string MatchKey(const std::string &surface) {
  std::string key;
  for (const auto &token : Tokenize(surface)) {
    if (!key.empty()) key.push_back(' ');
    key += token;
  }
  return key;
}

std::string StringValue(const ordered_json &v, const std::string &source,
                        size_t line, const std::string &what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw ParseError(source, line, what + " must be a string");
}

KbEntry ParseRecord(const std::string &text, const std::string &source,
                    size_t line) {
  ordered_json record;
  try {
    record = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(source, line, std::string("malformed record: ") + e.what());
  }
  if (!record.is_object()) {
    throw ParseError(source, line, "record must be an object");
  }
  static const std::set<std::string> kKnown = {"kb", "entry", "aliases",
                                               "fields", "relevance"};
  for (const auto &[key, value] : record.items()) {
    if (!kKnown.count(key)) {
      throw ParseError(source, line, "unknown key '" + key + "'");
    }
  }
  KbEntry entry;
  if (!record.contains("kb") || !record.contains("entry")) {
    throw ParseError(source, line, "record needs 'kb' and 'entry'");
  }
  entry.kb_name = StringValue(record["kb"], source, line, "kb");
  entry.entry_name = StringValue(record["entry"], source, line, "entry");
  if (entry.kb_name.empty() || entry.entry_name.empty()) {
    throw ParseError(source, line, "'kb' and 'entry' must be non-empty");
  }
  if (record.contains("aliases")) {
    const auto &aliases = record["aliases"];
    if (!aliases.is_array()) {
      throw ParseError(source, line, "'aliases' must be an array");
    }
    for (const auto &a : aliases) {
      entry.aliases.push_back(StringValue(a, source, line, "alias"));
    }
  }
  if (record.contains("fields")) {
    const auto &fields = record["fields"];
    if (!fields.is_object()) {
      throw ParseError(source, line, "'fields' must be an object");
    }
    for (const auto &[name, attrs] : fields.items()) {
      KbField field{name, {}};
      if (!attrs.is_object()) {
        throw ParseError(source, line,
                         "field '" + name + "' must map to an object");
      }
      for (const auto &[attr, value] : attrs.items()) {
        field.attributes.emplace_back(
            attr, StringValue(value, source, line, "attribute " + attr));
      }
      entry.fields.push_back(std::move(field));
    }
  }
  if (record.contains("relevance")) {
    const auto &rel = record["relevance"];
    if (!rel.is_number()) {
      throw ParseError(source, line, "'relevance' must be a number");
    }
    entry.relevance = rel.get<double>();
    if (!(entry.relevance >= 0.0)) {
      throw ParseError(source, line, "'relevance' must be non-negative");
    }
  }
  return entry;
}

}  // namespace

KnowledgeBase KnowledgeBase::Parse(std::istream &in,
                                   const std::string &source) {
  KnowledgeBase kb;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    KbEntry entry = ParseRecord(line, source, line_no);
    if (kb.name_.empty()) {
      kb.name_ = entry.kb_name;
    } else if (entry.kb_name != kb.name_) {
      throw ParseError(source, line_no,
                       "kb '" + entry.kb_name + "' differs from '" + kb.name_ +
                           "' declared earlier in the file");
    }
    kb.Add(std::move(entry));
  }
  if (kb.name_.empty()) {
    throw Error(ErrorCode::kParse, source + ": knowledge base has no records");
  }
  return kb;
}

KnowledgeBase KnowledgeBase::Load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kNotFound, "cannot open KB file " + path.string());
  }
  return Parse(in, path.string());
}

void KnowledgeBase::Add(KbEntry entry) {
  int id = static_cast<int>(entries_.size());
  std::set<std::string> keys = {MatchKey(entry.entry_name)};
  for (const auto &alias : entry.aliases) keys.insert(MatchKey(alias));
  for (const auto &key : keys) {
    if (!key.empty()) index_[key].push_back(id);
  }
  entries_.push_back(std::move(entry));
}

std::vector<int> KnowledgeBase::Match(const std::string &value) const {
  auto it = index_.find(MatchKey(value));
  if (it == index_.end()) return {};
  return it->second;
}

KbSet::KbSet(std::vector<KnowledgeBase> kbs) : kbs_(std::move(kbs)) {
  std::set<std::string> names;
  for (const auto &kb : kbs_) {
    if (!names.insert(kb.name()).second) {
      throw Error(ErrorCode::kDuplicate, "duplicate kb name '" + kb.name() + "'");
    }
  }
}

KbSet LoadKbSet(std::span<const std::filesystem::path> paths) {
  if (paths.empty()) throw Error(ErrorCode::kInvalidArgument, "empty KB set");
  std::vector<KnowledgeBase> kbs;
  kbs.reserve(paths.size());
  for (const auto &path : paths) kbs.push_back(KnowledgeBase::Load(path));
  return KbSet(std::move(kbs));
}

bool FeatureTensor::empty() const {
  return std::all_of(per_kb.begin(), per_kb.end(),
                     [](const KbSlice &s) { return s.entries.empty(); });
}

int FeatureTensor::field_count() const {
  int count = 0;
  for (const auto &slice : per_kb) {
    for (const auto &entry : slice.entries) {
      count += static_cast<int>(entry.fields.size());
    }
  }
  return count;
}

FeatureTensor Lookup(const KbSet &kbs, const std::string &value, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "lookup needs n >= 1");
  FeatureTensor out;
  out.per_kb.reserve(kbs.size());
  for (const auto &kb : kbs.kbs()) {
    KbSlice slice{kb.name(), {}};
    std::vector<int> hits = kb.Match(value);
    // Index order is file order, so a stable sort leaves ties in file order.
    std::stable_sort(hits.begin(), hits.end(), [&](int a, int b) {
      return kb.entries()[a].relevance > kb.entries()[b].relevance;
    });
    if (static_cast<int>(hits.size()) > n) hits.resize(n);
    for (int id : hits) {
      const KbEntry &e = kb.entries()[id];
      slice.entries.push_back({e.entry_name, e.relevance, e.fields});
    }
    out.per_kb.push_back(std::move(slice));
  }
  return out;
}

FlatFeatures FlattenFeatures(const FeatureTensor &features) {
  FlatFeatures flat;
  auto append = [&flat](const std::string &text) {
    for (auto &token : Tokenize(text)) flat.tokens.push_back(std::move(token));
  };
  for (size_t k = 0; k < features.per_kb.size(); ++k) {
    const auto &entries = features.per_kb[k].entries;
    for (size_t e = 0; e < entries.size(); ++e) {
      const auto &fields = entries[e].fields;
      for (size_t f = 0; f < fields.size(); ++f) {
        int begin = static_cast<int>(flat.tokens.size());
        append(fields[f].name);
        int end = static_cast<int>(flat.tokens.size());
        flat.fields.push_back({static_cast<int>(k), static_cast<int>(e),
                               static_cast<int>(f), Span{begin, end}});
        for (const auto &[attr, value] : fields[f].attributes) {
          append(attr);
          append(value);
        }
      }
    }
  }
  return flat;
}

}  // namespace kbslot
