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

#include "kbslot/dataset.h"

#include <fstream>
#include <set>

#include "json.hpp"
#include "kbslot/error.h"

namespace kbslot {

std::vector<SlotExample> ParseDataset(std::istream &in,
                                      const std::string &source) {
  static const std::set<std::string> kKnown = {
      "value", "context", "label", "source_domain", "source_key",
      "target_domain"};
  std::vector<SlotExample> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
      throw ParseError(source, line_no, std::string("malformed record: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(source, line_no, "record must be an object");
    SlotExample ex;
    for (const auto &[key, value] : record.items()) {
      if (!kKnown.count(key)) {
        throw ParseError(source, line_no, "unknown key '" + key + "'");
      }
      if (!value.is_string()) {
        throw ParseError(source, line_no, "'" + key + "' must be a string");
      }
    }
    if (!record.contains("value") || !record.contains("label")) {
      throw ParseError(source, line_no, "record needs 'value' and 'label'");
    }
    ex.value = record["value"].get<std::string>();
    ex.label = record["label"].get<std::string>();
    ex.context = record.value("context", "");
    ex.source_domain = record.value("source_domain", "");
    ex.source_key = record.value("source_key", "");
    ex.target_domain = record.value("target_domain", "");
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<SlotExample> LoadDataset(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kNotFound, "cannot open dataset " + path.string());
  }
  return ParseDataset(in, path.string());
}

void WriteDataset(std::ostream &out, const std::vector<SlotExample> &examples) {
  for (const auto &ex : examples) {
    nlohmann::ordered_json j;
    j["value"] = ex.value;
    j["context"] = ex.context;
    j["label"] = ex.label;
    if (!ex.source_domain.empty()) j["source_domain"] = ex.source_domain;
    if (!ex.source_key.empty()) j["source_key"] = ex.source_key;
    if (!ex.target_domain.empty()) j["target_domain"] = ex.target_domain;
    out << j.dump() << '\n';
  }
}

}  // namespace kbslot
