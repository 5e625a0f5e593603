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

#include "kbslot/evalharness.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "kbslot/error.h"

namespace kbslot {
namespace {

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string Trim(const std::string &s) {
  const size_t b = s.find_first_not_of(" \r\n");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \r\n");
  return s.substr(b, e - b + 1);
}

void Summarize(CellResult &cell) {
  const size_t n = cell.runs.size();
  if (n == 0) return;
  auto stats = [n, &cell](auto get, double &mean, double &sd) {
    mean = 0.0;
    for (const auto &r : cell.runs) mean += get(r);
    mean /= n;
    double ss = 0.0;
    for (const auto &r : cell.runs) ss += (get(r) - mean) * (get(r) - mean);
    sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  };
  stats([](const ScoreResult &r) { return r.f1; }, cell.f1_mean, cell.f1_std);
  stats([](const ScoreResult &r) { return r.accuracy; }, cell.accuracy_mean,
        cell.accuracy_std);
}

nlohmann::ordered_json CellJson(const CellResult &c) {
  nlohmann::ordered_json j;
  j["strategy"] = c.strategy;
  j["oov_pct"] = c.oov_pct;
  j["failed"] = c.failed;
  if (c.failed) j["error"] = c.error;
  j["f1_mean"] = c.f1_mean;
  j["f1_std"] = c.f1_std;
  j["accuracy_mean"] = c.accuracy_mean;
  j["accuracy_std"] = c.accuracy_std;
  auto runs = nlohmann::ordered_json::array();
  for (const auto &r : c.runs) {
    runs.push_back({{"f1", r.f1}, {"accuracy", r.accuracy}, {"tp", r.tp},
                    {"fp", r.fp}, {"fn", r.fn}, {"total", r.total}});
  }
  j["runs"] = runs;
  return j;
}

std::string CellText(const CellResult *c, bool f1) {
  if (c == nullptr) return "-";
  if (c->failed) return "failed";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%6.2f +/- %5.2f", f1 ? c->f1_mean : c->accuracy_mean,
                f1 ? c->f1_std : c->accuracy_std);
  return buf;
}

std::string Pad(const std::string &s, size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string RenderTable(const std::vector<std::string> &rows,
                        const std::vector<int> &settings,
                        const std::function<const CellResult *(size_t, int)> &cell) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = {"strategy"};
  for (int s : settings) {
    header.push_back("F1 @" + std::to_string(s) + "% OOV");
    header.push_back("Acc @" + std::to_string(s) + "% OOV");
  }
  grid.push_back(header);
  for (size_t r = 0; r < rows.size(); ++r) {
    std::vector<std::string> line = {rows[r]};
    for (int s : settings) {
      line.push_back(CellText(cell(r, s), true));
      line.push_back(CellText(cell(r, s), false));
    }
    grid.push_back(line);
  }
  std::vector<size_t> width(header.size(), 0);
  for (const auto &line : grid) {
    for (size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::string out;
  for (const auto &line : grid) {
    for (size_t i = 0; i < line.size(); ++i) {
      out += Pad(line[i], width[i] + (i + 1 < line.size() ? 2 : 0));
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

}  // namespace

HardcodedMap HardcodedMap::Parse(std::istream &in, const std::string &source) {
  HardcodedMap map;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    std::vector<std::string> cols = SplitTabs(line);
    if (cols.size() != 4) {
      throw ParseError(source, line_no,
                       "expected 4 tab-separated columns, got " +
                           std::to_string(cols.size()));
    }
    for (auto &c : cols) {
      c = Trim(c);
      if (c.empty()) throw ParseError(source, line_no, "empty column");
    }
    try {
      map.Add({cols[0], cols[1], cols[2], cols[3]});
    } catch (const Error &e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return map;
}

HardcodedMap HardcodedMap::Load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open map " + path.string());
  return Parse(in, path.string());
}

void HardcodedMap::Add(const MapEntry &entry) {
  auto key = std::make_tuple(entry.source_domain, entry.source_key, entry.target_domain);
  if (index_.count(key)) {
    throw Error(ErrorCode::kDuplicate, "duplicate mapping for " + entry.source_domain +
                                           "/" + entry.source_key + " -> " +
                                           entry.target_domain);
  }
  index_.emplace(std::move(key), entries_.size());
  entries_.push_back(entry);
}

std::optional<std::string> HardcodedMap::Resolve(
    const std::string &source_domain, const std::string &source_key,
    const std::string &target_domain) const {
  auto it = index_.find(std::make_tuple(source_domain, source_key, target_domain));
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].target_key;
}

HardcodedMap HardcodedMap::Restrict(const std::set<std::string> &keys) const {
  HardcodedMap out;
  for (const auto &e : entries_) {
    if (keys.count(e.target_key)) out.Add(e);
  }
  return out;
}

EvalData LoadEvalData(const EvalPaths &paths) {
  EvalData data;
  data.kbs = LoadKbSet(paths.kbs);
  data.taxonomy = TaxonomyGraph::Load(paths.taxonomy);
  data.embeddings = EmbeddingTable::Load(paths.embeddings, paths.embedding_dim);
  data.corpus = LoadDataset(paths.corpus);
  if (!paths.map.empty()) data.map = HardcodedMap::Load(paths.map);
  return data;
}

EvalData ParseSyntheticData(const SyntheticFiles &files) {
  EvalData data;
  std::vector<KnowledgeBase> kbs;
  for (const auto &[name, body] : files.kb_files) {
    std::istringstream in(body);
    kbs.push_back(KnowledgeBase::Parse(in, name + ".kbl"));
  }
  data.kbs = KbSet(std::move(kbs));
  std::istringstream tax(files.taxonomy);
  data.taxonomy = TaxonomyGraph::Parse(tax, "taxonomy.tsv");
  std::istringstream emb(files.embeddings);
  data.embeddings = EmbeddingTable::Parse(emb, files.embedding_dim, "embeddings.txt");
  std::istringstream corpus(files.corpus);
  data.corpus = ParseDataset(corpus, "corpus.jsonl");
  std::istringstream hm(files.hardcoded_map);
  data.map = HardcodedMap::Parse(hm, "hm.tsv");
  return data;
}

CandidateSet GenerateCandidates(
    const ResolverModel &model, const Resources &res,
    std::span<const std::pair<std::string, std::string>> values) {
  CandidateSet out;
  for (size_t i = 0; i < values.size(); ++i) {
    const auto &[value, context] = values[i];
    try {
      Prediction p = Predict(model, res, value, context);
      Candidate c;
      c.index = i;
      c.value = value;
      c.key = p.argmax_key();
      c.accepted = p.accepted_keys();
      if (c.accepted.empty()) c.accepted.push_back(c.key);
      out.candidates.push_back(std::move(c));
    } catch (const Error &e) {
      out.failures.push_back({i, value, e.what()});
    }
  }
  return out;
}

OovSplit MakeOovSplit(const std::vector<SlotExample> &dataset, int oov_pct,
                      int k, uint64_t seed) {
  if (oov_pct < 0 || oov_pct > 100) {
    throw Error(ErrorCode::kInvalidArgument, "oov_pct must be in [0, 100]");
  }
  if (k <= 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  std::map<std::string, std::vector<size_t>> by_key;
  for (size_t i = 0; i < dataset.size(); ++i) by_key[dataset[i].label].push_back(i);
  if (by_key.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "insufficient keys for an OOV split: need at least 2, have " +
                    std::to_string(by_key.size()));
  }

  std::mt19937_64 rng(seed);
  std::vector<std::string> keys;
  for (const auto &entry : by_key) keys.push_back(entry.first);
  std::shuffle(keys.begin(), keys.end(), rng);
  const size_t donors = std::max<size_t>(1, keys.size() / 3);
  const size_t eval = keys.size() - donors;
  const size_t withheld =
      static_cast<size_t>(std::lround(oov_pct / 100.0 * static_cast<double>(eval)));

  OovSplit split;
  split.oov_pct = oov_pct;
  split.k = k;
  split.seed = seed;
  std::set<std::string> train_keys(keys.begin(), keys.begin() + donors);
  train_keys.insert(keys.begin() + donors + withheld, keys.end());
  split.train_keys.assign(train_keys.begin(), train_keys.end());
  split.test_keys.assign(keys.begin() + donors, keys.end());
  std::sort(split.test_keys.begin(), split.test_keys.end());
  split.unseen_keys.assign(keys.begin() + donors, keys.begin() + donors + withheld);
  std::sort(split.unseen_keys.begin(), split.unseen_keys.end());

  std::vector<bool> in_train(dataset.size(), false);
  for (const auto &key : split.train_keys) {
    std::vector<size_t> idx = by_key[key];
    std::shuffle(idx.begin(), idx.end(), rng);
    for (size_t i = 0; i < std::min<size_t>(k, idx.size()); ++i) in_train[idx[i]] = true;
  }
  const std::set<std::string> test_keys(split.test_keys.begin(), split.test_keys.end());
  for (size_t i = 0; i < dataset.size(); ++i) {
    if (in_train[i]) {
      split.train_examples.push_back(dataset[i]);
    } else if (test_keys.count(dataset[i].label)) {
      split.test_examples.push_back(dataset[i]);
    }
  }
  return split;
}

ScoreResult Score(std::span<const std::vector<std::string>> predictions,
                  std::span<const std::string> gold) {
  if (predictions.size() != gold.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "score: " + std::to_string(predictions.size()) +
                    " predictions for " + std::to_string(gold.size()) + " gold labels");
  }
  ScoreResult r;
  r.total = static_cast<int>(gold.size());
  for (size_t i = 0; i < gold.size(); ++i) {
    const auto &emitted = predictions[i];
    if (emitted.empty()) {
      ++r.fn;
      continue;
    }
    const bool correct = std::all_of(emitted.begin(), emitted.end(), [&](const std::string &key) {
      return IsFuzzyMatch(gold[i], key);
    });
    if (correct) {
      ++r.tp;
    } else {
      ++r.fp;
      ++r.fn;
    }
  }
  const int denom = 2 * r.tp + r.fp + r.fn;
  r.f1 = denom > 0 ? 100.0 * 2 * r.tp / denom : 0.0;
  r.accuracy = r.total > 0 ? 100.0 * r.tp / r.total : 0.0;
  return r;
}

std::vector<std::vector<std::string>> ResolverEmissions(
    const ResolverModel &model, const Resources &res,
    const std::vector<SlotExample> &test) {
  std::vector<std::vector<std::string>> out;
  out.reserve(test.size());
  for (const auto &ex : test) {
    try {
      Prediction p = Predict(model, res, ex.value, ex.context);
      std::vector<std::string> keys = p.accepted_keys();
      if (keys.empty()) keys.push_back(p.argmax_key());
      out.push_back(std::move(keys));
    } catch (const Error &) {
      out.emplace_back();
    }
  }
  return out;
}

std::vector<std::vector<std::string>> MapEmissions(
    const HardcodedMap &map, const std::vector<SlotExample> &test) {
  std::vector<std::vector<std::string>> out;
  for (const auto &ex : test) {
    auto key = map.Resolve(ex.source_domain, ex.source_key, ex.target_domain);
    out.push_back(key ? std::vector<std::string>{*key} : std::vector<std::string>{});
  }
  return out;
}

std::vector<std::vector<std::string>> MlpEmissions(
    const MlpBaseline &mlp, const EmbeddingTable &emb,
    const HardcodedMap &map, const std::vector<SlotExample> &test) {
  std::map<std::string, std::vector<std::string>> vocab;
  for (const auto &e : map.entries()) {
    auto &keys = vocab[e.target_domain];
    if (std::find(keys.begin(), keys.end(), e.target_key) == keys.end()) {
      keys.push_back(e.target_key);
    }
  }
  std::vector<std::vector<std::string>> out;
  for (const auto &ex : test) {
    std::string best;
    double best_score = 0.5;
    auto it = vocab.find(ex.target_domain);
    if (it != vocab.end()) {
      for (const auto &key : it->second) {
        const double s = mlp.Score(emb, {ex.source_key, ex.value, key});
        if (s >= best_score) {
          best_score = s;
          best = key;
        }
      }
    }
    out.push_back(best.empty() ? std::vector<std::string>{}
                               : std::vector<std::string>{best});
  }
  return out;
}

std::vector<std::string> GoldLabels(const std::vector<SlotExample> &examples) {
  std::vector<std::string> gold;
  for (const auto &ex : examples) gold.push_back(ex.label);
  return gold;
}

ScoreResult EvaluateResolver(const EvalData &data, const OovSplit &split,
                             const ModelConfig &model, const TrainConfig &train,
                             uint64_t seed) {
  TrainConfig cfg = train;
  cfg.seed = seed;
  TrainResult trained =
      Train(ResolverModel(model, seed), split.train_examples, cfg, data.resources());
  auto emitted = ResolverEmissions(trained.model, data.resources(), split.test_examples);
  return Score(emitted, GoldLabels(split.test_examples));
}

const CellResult *CompareReport::Find(const std::string &strategy, int oov_pct) const {
  for (const auto &c : cells) {
    if (c.strategy == strategy && c.oov_pct == oov_pct) return &c;
  }
  return nullptr;
}

CompareReport CompareStrategies(const EvalData &data,
                                const CompareConfig &config,
                                const ProgressCallback &progress) {
  if (config.seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "no seeds given");
  if (config.oov_settings.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no OOV settings given");
  }
  const std::vector<std::string> strategies = {"hm", "mlp", "resolver"};
  CompareReport report;
  report.seeds = config.seeds;
  for (const auto &s : strategies) {
    for (int pct : config.oov_settings) {
      CellResult cell;
      cell.strategy = s;
      cell.oov_pct = pct;
      report.cells.push_back(cell);
    }
  }
  auto cell_of = [&](size_t strategy, size_t setting) -> CellResult & {
    return report.cells[strategy * config.oov_settings.size() + setting];
  };

  for (size_t si = 0; si < config.oov_settings.size(); ++si) {
    const int pct = config.oov_settings[si];
    for (uint64_t seed : config.seeds) {
      OovSplit split;
      try {
        split = MakeOovSplit(data.corpus, pct, config.k, seed);
      } catch (const Error &e) {
        for (size_t s = 0; s < strategies.size(); ++s) {
          cell_of(s, si).failed = true;
          cell_of(s, si).error = e.what();
        }
        continue;
      }
      const std::set<std::string> train_keys(split.train_keys.begin(),
                                             split.train_keys.end());
      const HardcodedMap table = data.map.Restrict(train_keys);
      const std::vector<std::string> gold = GoldLabels(split.test_examples);

      auto run = [&](size_t s, const std::function<ScoreResult()> &fn) {
        CellResult &cell = cell_of(s, si);
        if (cell.failed) return;
        try {
          cell.runs.push_back(fn());
          if (progress) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "oov=%d seed=%llu %s f1=%.2f acc=%.2f", pct,
                          static_cast<unsigned long long>(seed), strategies[s].c_str(),
                          cell.runs.back().f1, cell.runs.back().accuracy);
            progress(buf);
          }
        } catch (const std::exception &e) {
          cell.failed = true;
          cell.error = e.what();
        }
      };
      run(0, [&] { return Score(MapEmissions(table, split.test_examples), gold); });
      run(1, [&] {
        std::vector<MapPair> positives;
        for (const auto &ex : split.train_examples) {
          auto key = table.Resolve(ex.source_domain, ex.source_key, ex.target_domain);
          if (key) positives.push_back({ex.source_key, ex.value, *key});
        }
        MlpConfig mlp = config.mlp;
        mlp.seed = seed;
        MlpTrainResult trained =
            TrainMlp(positives, config.mlp_negatives_ratio, mlp, data.embeddings);
        return Score(MlpEmissions(trained.model, data.embeddings, table,
                                  split.test_examples),
                     gold);
      });
      run(2, [&] {
        return EvaluateResolver(data, split, config.model, config.train, seed);
      });
    }
  }
  for (auto &cell : report.cells) Summarize(cell);
  return report;
}

std::string CompareReport::ToJson() const {
  nlohmann::ordered_json j;
  j["seeds"] = seeds;
  auto arr = nlohmann::ordered_json::array();
  for (const auto &c : cells) arr.push_back(CellJson(c));
  j["cells"] = arr;
  return j.dump(2) + "\n";
}

std::string CompareReport::ToTable() const {
  std::vector<std::string> rows;
  std::vector<int> settings;
  for (const auto &c : cells) {
    if (std::find(rows.begin(), rows.end(), c.strategy) == rows.end()) rows.push_back(c.strategy);
    if (std::find(settings.begin(), settings.end(), c.oov_pct) == settings.end()) {
      settings.push_back(c.oov_pct);
    }
  }
  return RenderTable(rows, settings, [&](size_t r, int s) { return Find(rows[r], s); });
}

AblationReport RunAblation(const EvalData &data, const CompareConfig &config,
                           const std::vector<AblationVariant> &variants,
                           const ProgressCallback &progress) {
  if (variants.empty()) throw Error(ErrorCode::kInvalidArgument, "no ablation variants");
  if (config.seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "no seeds given");
  AblationReport report;
  report.seeds = config.seeds;
  report.oov_settings = config.oov_settings;
  for (const auto &v : variants) {
    v.model.Validate();
    report.variants.push_back(v.name);
    report.cells.emplace_back();
    for (int pct : config.oov_settings) {
      CellResult cell;
      cell.strategy = v.name;
      cell.oov_pct = pct;
      report.cells.back().push_back(cell);
    }
  }
  for (size_t si = 0; si < config.oov_settings.size(); ++si) {
    const int pct = config.oov_settings[si];
    for (uint64_t seed : config.seeds) {
      OovSplit split = MakeOovSplit(data.corpus, pct, config.k, seed);
      for (size_t v = 0; v < variants.size(); ++v) {
        CellResult &cell = report.cells[v][si];
        if (cell.failed) continue;
        try {
          cell.runs.push_back(
              EvaluateResolver(data, split, variants[v].model, config.train, seed));
          if (progress) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "oov=%d seed=%llu %s f1=%.2f acc=%.2f", pct,
                          static_cast<unsigned long long>(seed), variants[v].name.c_str(),
                          cell.runs.back().f1, cell.runs.back().accuracy);
            progress(buf);
          }
        } catch (const std::exception &e) {
          cell.failed = true;
          cell.error = e.what();
        }
      }
    }
  }
  for (auto &row : report.cells) {
    for (auto &cell : row) Summarize(cell);
  }
  return report;
}

std::string AblationReport::ToJson() const {
  nlohmann::ordered_json j;
  j["seeds"] = seeds;
  j["oov_settings"] = oov_settings;
  auto arr = nlohmann::ordered_json::array();
  for (const auto &row : cells) {
    for (const auto &c : row) arr.push_back(CellJson(c));
  }
  j["cells"] = arr;
  return j.dump(2) + "\n";
}

std::string AblationReport::ToTable() const {
  return RenderTable(variants, oov_settings, [&](size_t r, int s) -> const CellResult * {
    for (const auto &c : cells[r]) {
      if (c.oov_pct == s) return &c;
    }
    return nullptr;
  });
}

}  // namespace kbslot
