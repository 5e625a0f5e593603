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

#include "commands.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "kbslot/checkpoint.h"
#include "kbslot/error.h"
#include "kbslot/evalharness.h"
#include "kbslot/synthetic.h"
#include "wordnet.h"

namespace kbslot::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

RunConfig LoadWithOverrides(const CommonOptions &o, const PathNeeds &needs) {
  RunConfig c = LoadRunConfig(o.config);
  if (o.out) c.paths.output = fs::absolute(*o.out).lexically_normal();
  if (o.seed) {
    c.seed = *o.seed;
    c.train.seed = *o.seed;
  }
  ValidateRunConfig(c, needs);
  return c;
}

void WriteFile(const fs::path &path, const std::string &body) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << body;
  if (!out) throw CliError(kExitData, "cannot write " + path.string());
}

struct Index {
  std::string command;
  json config;
  json artifacts = json::array();

  void Add(const std::string &path, const std::string &kind) {
    artifacts.push_back({{"path", path}, {"kind", kind}});
  }
  void Write(const fs::path &dir) const {
    json j;
    j["command"] = command;
    j["config"] = config;
    j["artifacts"] = artifacts;
    WriteFile(dir / "index.json", j.dump(2) + "\n");
  }
};

json HistoryJson(const std::vector<EpochMetrics> &history) {
  json arr = json::array();
  for (const auto &m : history) {
    json e;
    e["epoch"] = m.epoch;
    e["train_loss"] = m.train_loss;
    e["validation_loss"] = std::isfinite(m.validation_loss) ? json(m.validation_loss) : json();
    e["tau"] = m.tau;
    e["steps"] = m.steps;
    arr.push_back(e);
  }
  return arr;
}

struct Stores {
  KbSet kbs;
  TaxonomyGraph taxonomy;
  EmbeddingTable embeddings{1};
  Resources resources() const { return {&kbs, &taxonomy, &embeddings}; }
};

Stores LoadStores(const RunPaths &paths, int embedding_dim) {
  Stores s;
  s.kbs = LoadKbSet(paths.kbs);
  s.taxonomy = TaxonomyGraph::Load(paths.taxonomy);
  s.embeddings = EmbeddingTable::Load(paths.embeddings, embedding_dim);
  spdlog::info("loaded {} KBs, {} taxonomy nodes, {} embeddings", s.kbs.size(),
               s.taxonomy.node_count(), s.embeddings.size());
  return s;
}

RunPaths PathsFromEcho(const json &echo) {
  RunPaths p;
  try {
    const json &paths = echo.at("paths");
    for (const auto &kb : paths.at("kbs")) p.kbs.emplace_back(kb.get<std::string>());
    p.taxonomy = paths.at("taxonomy").get<std::string>();
    p.embeddings = paths.at("embeddings").get<std::string>();
  } catch (const json::exception &) {
    throw CliError(kExitConfig,
                   "checkpoint carries no usable path echo; pass --config");
  }
  return p;
}

std::string Percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

int RunTrain(const CommonOptions &options, std::ostream &out) {
  RunConfig config = LoadWithOverrides(options, {.dataset = true});
  const fs::path dir = config.paths.output;
  Stores stores = LoadStores(config.paths, config.model.embedding_dim);
  std::vector<SlotExample> dataset = LoadDataset(config.paths.dataset);
  spdlog::info("training on {} examples (seed {})", dataset.size(), config.seed);

  ResolverModel initial(config.model, config.seed);
  TrainResult result = Train(initial, dataset, config.train, stores.resources(),
                             [](const EpochMetrics &m) {
                               spdlog::info("epoch {} train_loss {:.6f} val_loss {:.6f} tau {:.4f}",
                                            m.epoch, m.train_loss, m.validation_loss, m.tau);
                             });
  const json echo = RunConfigToJson(config);
  Checkpoint ckpt;
  ckpt.model = result.model;
  ckpt.config_json = echo.dump();
  ckpt.seed = config.seed;
  ckpt.best_epoch = result.best_epoch;
  ckpt.history = result.history;
  SaveCheckpoint(ckpt, dir / "checkpoint");

  json metrics;
  metrics["config"] = echo;
  metrics["best_epoch"] = result.best_epoch;
  metrics["early_stopped"] = result.early_stopped;
  metrics["train_examples"] = result.train_examples;
  metrics["validation_examples"] = result.validation_examples;
  metrics["skipped_examples"] = result.skipped_examples;
  metrics["history"] = HistoryJson(result.history);
  WriteFile(dir / "metrics.json", metrics.dump(2) + "\n");

  Index index{"train", echo};
  index.Add("checkpoint/manifest.json", "checkpoint_manifest");
  index.Add("checkpoint/weights.bin", "checkpoint_blob");
  index.Add("metrics.json", "metrics");
  index.Write(dir);
  out << "trained " << result.train_examples << " examples, best epoch "
      << result.best_epoch << ", skipped " << result.skipped_examples << "\n"
      << "checkpoint: " << (dir / "checkpoint").string() << "\n";
  return kExitOk;
}

int RunPredict(const PredictOptions &options, std::ostream &out) {
  if (options.value.empty()) throw CliError(kExitUsage, "--value must not be empty");
  Checkpoint ckpt;
  try {
    ckpt = LoadCheckpoint(options.checkpoint);
  } catch (const Error &e) {
    throw CliError(kExitData, std::string("cannot load checkpoint: ") + e.what());
  }
  RunPaths paths;
  if (options.config) {
    RunConfig c = LoadRunConfig(*options.config);
    ValidateRunConfig(c, {});
    paths = c.paths;
  } else {
    json echo = json::parse(ckpt.config_json, nullptr, false);
    if (echo.is_discarded()) throw CliError(kExitData, "checkpoint config echo is not JSON");
    paths = PathsFromEcho(echo);
    for (const auto &p : paths.kbs) {
      if (!fs::exists(p)) throw CliError(kExitConfig, "kb path does not exist: " + p.string());
    }
    for (const fs::path *p : {&paths.taxonomy, &paths.embeddings}) {
      if (!fs::exists(*p)) throw CliError(kExitConfig, "path does not exist: " + p->string());
    }
  }
  Stores stores = LoadStores(paths, ckpt.model.config().embedding_dim);
  Prediction p = Predict(ckpt.model, stores.resources(), options.value, options.context);

  std::vector<int> order(p.keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return p.probs(a) > p.probs(b); });
  std::vector<bool> accepted(p.keys.size(), false);
  for (int i : p.accepted) accepted[i] = true;

  if (options.json) {
    json j;
    j["value"] = options.value;
    j["context"] = options.context;
    j["tau"] = ckpt.model.tau();
    json keys = json::array();
    for (int i : order) {
      keys.push_back({{"key", p.keys.keys[i]}, {"prob", p.probs(i)}, {"accepted", bool(accepted[i])}});
    }
    j["keys"] = keys;
    j["accepted"] = p.accepted_keys();
    j["argmax"] = p.argmax_key();
    out << j.dump() << "\n";
    return kExitOk;
  }
  size_t width = 3;
  for (const auto &k : p.keys.keys) width = std::max(width, k.size());
  for (int i : order) {
    char prob[32];
    std::snprintf(prob, sizeof(prob), "%.6f", p.probs(i));
    out << p.keys.keys[i] << std::string(width - p.keys.keys[i].size() + 2, ' ') << prob
        << (accepted[i] ? "  *" : "") << "\n";
  }
  out << "tau " << ckpt.model.tau() << ", accepted:";
  for (const auto &k : p.accepted_keys()) out << " " << k;
  out << "\n";
  return kExitOk;
}

int RunCompare(const CompareOptions &options, std::ostream &out) {
  RunConfig config = LoadWithOverrides(options.common, {.dataset = true, .hm_table = true});
  if (!options.oov.empty()) config.eval.oov = options.oov;
  if (!options.seeds.empty()) {
    config.eval.seeds = options.seeds;
  } else if (options.common.seed) {
    config.eval.seeds = {*options.common.seed};
  }
  ValidateRunConfig(config, {.dataset = true, .hm_table = true});
  EvalData data = LoadEvalData(MakeEvalPaths(config));
  spdlog::info("comparing on {} examples, {} map entries", data.corpus.size(), data.map.size());
  CompareReport report = CompareStrategies(data, MakeCompareConfig(config),
                                           [](const std::string &s) { spdlog::info("{}", s); });
  const json echo = RunConfigToJson(config);
  json j = json::parse(report.ToJson());
  j["config"] = echo;
  const fs::path dir = config.paths.output;
  WriteFile(dir / "compare.json", j.dump(2) + "\n");
  const std::string table = report.ToTable();
  WriteFile(dir / "compare.txt", "# config: " + echo.dump() + "\n" + table);
  Index index{"compare", echo};
  index.Add("compare.json", "report");
  index.Add("compare.txt", "table");
  index.Write(dir);
  out << table;
  return kExitOk;
}

int RunAblate(const AblateOptions &options, std::ostream &out) {
  if (!options.no_threshold && !options.metric) {
    throw CliError(kExitUsage, "ablate needs --no-threshold and/or --metric");
  }
  std::optional<MetricKind> metric;
  if (options.metric) {
    try {
      metric = ParseMetricKind(*options.metric);
    } catch (const Error &e) {
      throw CliError(kExitUsage, e.what());
    }
  }
  RunConfig config = LoadWithOverrides(options.common, {.dataset = true});
  if (!options.oov.empty()) config.eval.oov = options.oov;
  if (!options.seeds.empty()) {
    config.eval.seeds = options.seeds;
  } else if (options.common.seed) {
    config.eval.seeds = {*options.common.seed};
  }
  ValidateRunConfig(config, {.dataset = true});
  config.paths.hm_table.clear();
  EvalData data = LoadEvalData(MakeEvalPaths(config));

  // Variants: the base model, then each flag alone, then both together.
  const ModelConfig base = config.model;
  std::vector<AblationVariant> variants = {{"base", base}};
  if (options.no_threshold) {
    AblationVariant v{"no_threshold", base};
    v.model.threshold_enabled = false;
    variants.push_back(v);
  }
  if (metric) {
    AblationVariant v{"metric=" + std::string(MetricKindName(*metric)), base};
    v.model.metric = *metric;
    variants.push_back(v);
  }
  if (options.no_threshold && metric) {
    AblationVariant v{"no_threshold+metric=" + std::string(MetricKindName(*metric)), base};
    v.model.threshold_enabled = false;
    v.model.metric = *metric;
    variants.push_back(v);
  }
  AblationReport report = RunAblation(data, MakeCompareConfig(config), variants,
                                      [](const std::string &s) { spdlog::info("{}", s); });

  // Accuracy deltas against the base row; the metric ablation allows the
  // base one point of slack.
  json deltas = json::array();
  std::ostringstream text;
  text << report.ToTable() << "\n";
  for (size_t v = 1; v < variants.size(); ++v) {
    for (size_t s = 0; s < report.oov_settings.size(); ++s) {
      const CellResult &b = report.cells[0][s];
      const CellResult &c = report.cells[v][s];
      const double delta = b.accuracy_mean - c.accuracy_mean;
      const bool metric_only = variants[v].model.threshold_enabled;
      const double slack = metric_only ? 1.0 : 0.0;
      const bool ok = !b.failed && !c.failed && delta >= -slack;
      deltas.push_back({{"variant", variants[v].name},
                        {"oov_pct", report.oov_settings[s]},
                        {"base_accuracy", b.accuracy_mean},
                        {"variant_accuracy", c.accuracy_mean},
                        {"delta", delta},
                        {"direction_holds", ok}});
      text << variants[v].name << " @" << report.oov_settings[s] << "% OOV: base "
           << Percent(b.accuracy_mean) << " vs " << Percent(c.accuracy_mean) << " (delta "
           << Percent(delta) << ") " << (ok ? "direction holds" : "direction violated") << "\n";
    }
  }
  const json echo = RunConfigToJson(config);
  json j = json::parse(report.ToJson());
  j["variants"] = report.variants;
  j["deltas"] = deltas;
  j["config"] = echo;
  const fs::path dir = config.paths.output;
  WriteFile(dir / "ablation.json", j.dump(2) + "\n");
  WriteFile(dir / "ablation.txt", "# config: " + echo.dump() + "\n" + text.str());
  Index index{"ablate", echo};
  index.Add("ablation.json", "report");
  index.Add("ablation.txt", "table");
  index.Write(dir);
  out << text.str();
  return kExitOk;
}

int RunGenFixtures(const GenFixturesOptions &options, std::ostream &out) {
  SyntheticOptions so;
  so.seed = options.seed;
  so.values_per_type = options.values_per_type;
  so.contexts_per_role = options.contexts_per_role;
  SyntheticFiles files;
  try {
    files = GenerateSynthetic(so);
  } catch (const Error &e) {
    throw CliError(kExitUsage, e.what());
  }
  const fs::path dir = fs::absolute(options.out).lexically_normal();
  std::vector<fs::path> written = WriteSynthetic(files, dir);

  RunConfig config = ProfileDefaults("desk");
  for (const auto &[name, body] : files.kb_files) config.paths.kbs.push_back("kb/" + name + ".kbl");
  config.paths.taxonomy = "taxonomy.tsv";
  config.paths.embeddings = "embeddings.txt";
  config.paths.dataset = "corpus.jsonl";
  config.paths.hm_table = "hm.tsv";
  config.paths.output = "out";
  config.model.embedding_dim = files.embedding_dim;
  WriteFile(dir / "config.yaml", RunConfigToYaml(config));

  Index index{"gen-fixtures", RunConfigToJson(config)};
  index.config["synthetic"] = {{"seed", so.seed},
                               {"values_per_type", so.values_per_type},
                               {"contexts_per_role", so.contexts_per_role}};
  for (const auto &p : written) index.Add(fs::relative(p, dir).string(), "fixture");
  index.Add("config.yaml", "config");
  index.Write(dir);
  out << "wrote " << written.size() + 1 << " files to " << dir.string() << " ("
      << files.labels.size() << " keys)\n";
  return kExitOk;
}

int RunImportWordNet(const ImportWordNetOptions &options, std::ostream &out) {
  std::ifstream in(options.input);
  if (!in) throw CliError(kExitConfig, "wordnet file does not exist: " + options.input.string());
  std::ostringstream edges;
  WordNetImportStats stats =
      ImportWordNet(in, edges, options.input.string(), options.instances);
  WriteFile(fs::absolute(options.output), edges.str());
  out << "read " << stats.synsets << " synsets, wrote " << stats.edges << " edges to "
      << options.output.string() << "\n";
  return kExitOk;
}

int ExitCodeFor(const std::exception &e) {
  if (const auto *cli = dynamic_cast<const CliError *>(&e)) return cli->exit_code();
  if (const auto *err = dynamic_cast<const Error *>(&e)) {
    switch (err->code()) {
      case ErrorCode::kInvalidArgument:
        return kExitConfig;
      default:
        return kExitData;
    }
  }
  return kExitData;
}

std::string ErrorRecord(int exit_code, const std::string &message) {
  const char *category = exit_code == kExitConfig  ? "config"
                         : exit_code == kExitData  ? "data"
                         : exit_code == kExitUsage ? "usage"
                                                   : "internal";
  json j;
  j["error"] = category;
  j["exit_code"] = exit_code;
  j["message"] = message;
  return j.dump();
}

}  // namespace kbslot::cli
