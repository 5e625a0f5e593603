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

#include "run_config.h"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "kbslot/error.h"

namespace kbslot::cli {
namespace {

namespace fs = std::filesystem;

CliError ConfigError(const std::string &source, const std::string &message) {
  return CliError(kExitConfig, source + ": " + message);
}

void CheckKeys(const YAML::Node &node, const std::string &section,
               const std::set<std::string> &known, const std::string &source) {
  if (!node.IsMap()) throw ConfigError(source, "'" + section + "' must be a mapping");
  for (const auto &kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!known.count(key)) {
      throw ConfigError(source, "unknown key '" + (section.empty() ? key : section + "." + key) + "'");
    }
  }
}

template <typename T>
void Read(const YAML::Node &node, const char *key, T &out, const std::string &where,
          const std::string &source) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception &) {
    throw ConfigError(source, "bad value for '" + where + "." + key + "'");
  }
}

fs::path Resolve(const fs::path &base, const std::string &p) {
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

void ReadPath(const YAML::Node &node, const char *key, fs::path &out,
              const fs::path &base, const std::string &source) {
  std::string s;
  Read(node, key, s, "paths", source);
  if (!s.empty()) out = Resolve(base, s);
}

}  // namespace

RunConfig ProfileDefaults(const std::string &profile) {
  RunConfig c;
  c.profile = profile;
  if (profile == "desk") return c;
  if (profile == "full") {
    c.model.embedding_dim = 400;
    c.model.hidden_dim = 200;
    c.model.bregman_dim = 512;
    c.model.bregman_depth = 10;
    return c;
  }
  throw CliError(kExitConfig, "unknown profile '" + profile + "' (expected full or desk)");
}

RunConfig ParseRunConfig(const std::string &text, const fs::path &base_dir,
                         const std::string &source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception &e) {
    throw ConfigError(source, std::string("malformed YAML: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  CheckKeys(root, "", {"profile", "seed", "paths", "model", "train", "eval"}, source);

  std::string profile = "full";
  Read(root, "profile", profile, "", source);
  RunConfig c = ProfileDefaults(profile);
  Read(root, "seed", c.seed, "", source);
  c.paths.output = base_dir / "out";

  if (const YAML::Node p = root["paths"]) {
    CheckKeys(p, "paths",
              {"kbs", "taxonomy", "embeddings", "dataset", "hm_table", "output"}, source);
    if (p["kbs"]) {
      std::vector<std::string> kbs;
      Read(p, "kbs", kbs, "paths", source);
      for (const auto &k : kbs) c.paths.kbs.push_back(Resolve(base_dir, k));
    }
    ReadPath(p, "taxonomy", c.paths.taxonomy, base_dir, source);
    ReadPath(p, "embeddings", c.paths.embeddings, base_dir, source);
    ReadPath(p, "dataset", c.paths.dataset, base_dir, source);
    ReadPath(p, "hm_table", c.paths.hm_table, base_dir, source);
    ReadPath(p, "output", c.paths.output, base_dir, source);
  }

  if (const YAML::Node m = root["model"]) {
    CheckKeys(m, "model",
              {"embedding_dim", "hidden_dim", "bregman_dim", "bregman_depth", "epsilon",
               "tau", "gate_sharpness", "recurrent_dropout", "max_features",
               "max_hypernyms", "max_depth", "metric", "threshold_enabled",
               "softmax_negation", "shared_encoder_init"},
              source);
    ModelConfig &mc = c.model;
    Read(m, "embedding_dim", mc.embedding_dim, "model", source);
    Read(m, "hidden_dim", mc.hidden_dim, "model", source);
    Read(m, "bregman_dim", mc.bregman_dim, "model", source);
    Read(m, "bregman_depth", mc.bregman_depth, "model", source);
    Read(m, "epsilon", mc.epsilon, "model", source);
    Read(m, "tau", mc.tau_init, "model", source);
    Read(m, "gate_sharpness", mc.gate_sharpness, "model", source);
    Read(m, "recurrent_dropout", mc.recurrent_dropout, "model", source);
    Read(m, "max_features", mc.max_features, "model", source);
    Read(m, "max_hypernyms", mc.max_hypernyms, "model", source);
    Read(m, "max_depth", mc.max_depth, "model", source);
    Read(m, "threshold_enabled", mc.threshold_enabled, "model", source);
    Read(m, "softmax_negation", mc.negate_distances, "model", source);
    Read(m, "shared_encoder_init", mc.shared_encoder_init, "model", source);
    std::string metric;
    Read(m, "metric", metric, "model", source);
    if (!metric.empty()) {
      try {
        mc.metric = ParseMetricKind(metric);
      } catch (const Error &e) {
        throw ConfigError(source, e.what());
      }
    }
  }

  if (const YAML::Node t = root["train"]) {
    CheckKeys(t, "train",
              {"epochs", "patience", "batch_size", "learning_rate", "beta1", "beta2",
               "adam_epsilon", "validation_fraction", "gate_weight", "tau_min",
               "tau_max", "float64_params"},
              source);
    TrainConfig &tc = c.train;
    Read(t, "epochs", tc.epochs, "train", source);
    Read(t, "patience", tc.patience, "train", source);
    Read(t, "batch_size", tc.batch_size, "train", source);
    Read(t, "learning_rate", tc.adam.learning_rate, "train", source);
    Read(t, "beta1", tc.adam.beta1, "train", source);
    Read(t, "beta2", tc.adam.beta2, "train", source);
    Read(t, "adam_epsilon", tc.adam.epsilon, "train", source);
    Read(t, "validation_fraction", tc.validation_fraction, "train", source);
    Read(t, "gate_weight", tc.gate_weight, "train", source);
    Read(t, "tau_min", tc.tau_min, "train", source);
    Read(t, "tau_max", tc.tau_max, "train", source);
    Read(t, "float64_params", tc.float64_params, "train", source);
  }

  if (const YAML::Node e = root["eval"]) {
    CheckKeys(e, "eval",
              {"oov", "seeds", "k", "negatives_ratio", "mlp_hidden", "mlp_epochs",
               "mlp_batch_size", "mlp_learning_rate"},
              source);
    EvalSettings &es = c.eval;
    Read(e, "oov", es.oov, "eval", source);
    Read(e, "seeds", es.seeds, "eval", source);
    Read(e, "k", es.k, "eval", source);
    Read(e, "negatives_ratio", es.negatives_ratio, "eval", source);
    Read(e, "mlp_hidden", es.mlp.hidden_dim, "eval", source);
    Read(e, "mlp_epochs", es.mlp.epochs, "eval", source);
    Read(e, "mlp_batch_size", es.mlp.batch_size, "eval", source);
    Read(e, "mlp_learning_rate", es.mlp.learning_rate, "eval", source);
  }
  c.train.seed = c.seed;
  return c;
}

RunConfig LoadRunConfig(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw CliError(kExitConfig, "config file not found: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  fs::path base = fs::absolute(path).parent_path();
  return ParseRunConfig(buf.str(), base, path.string());
}

void ValidateRunConfig(const RunConfig &config, const PathNeeds &needs) {
  auto require = [](const fs::path &p, const char *what) {
    if (p.empty()) throw CliError(kExitConfig, std::string("missing ") + what + " path");
    if (!fs::exists(p)) {
      throw CliError(kExitConfig, std::string(what) + " path does not exist: " + p.string());
    }
  };
  if (config.paths.kbs.empty()) throw CliError(kExitConfig, "missing kbs paths");
  for (const auto &kb : config.paths.kbs) require(kb, "kb");
  require(config.paths.taxonomy, "taxonomy");
  require(config.paths.embeddings, "embeddings");
  if (needs.dataset) require(config.paths.dataset, "dataset");
  if (needs.hm_table) require(config.paths.hm_table, "hm_table");
  try {
    config.model.Validate();
    config.train.Validate();
  } catch (const Error &e) {
    throw CliError(kExitConfig, e.what());
  }
  if (config.eval.k <= 0) throw CliError(kExitConfig, "eval.k must be positive");
  for (int pct : config.eval.oov) {
    if (pct < 0 || pct > 100) throw CliError(kExitConfig, "eval.oov values must be in [0, 100]");
  }
  if (config.eval.seeds.empty()) throw CliError(kExitConfig, "eval.seeds must not be empty");
}

nlohmann::ordered_json RunConfigToJson(const RunConfig &c) {
  nlohmann::ordered_json j;
  j["profile"] = c.profile;
  j["seed"] = c.seed;
  auto &p = j["paths"];
  p["kbs"] = nlohmann::ordered_json::array();
  for (const auto &kb : c.paths.kbs) p["kbs"].push_back(kb.string());
  p["taxonomy"] = c.paths.taxonomy.string();
  p["embeddings"] = c.paths.embeddings.string();
  p["dataset"] = c.paths.dataset.string();
  p["hm_table"] = c.paths.hm_table.string();
  p["output"] = c.paths.output.string();
  const ModelConfig &m = c.model;
  j["model"] = {{"embedding_dim", m.embedding_dim},
                {"hidden_dim", m.hidden_dim},
                {"bregman_dim", m.bregman_dim},
                {"bregman_depth", m.bregman_depth},
                {"epsilon", m.epsilon},
                {"tau", m.tau_init},
                {"gate_sharpness", m.gate_sharpness},
                {"recurrent_dropout", m.recurrent_dropout},
                {"max_features", m.max_features},
                {"max_hypernyms", m.max_hypernyms},
                {"max_depth", m.max_depth},
                {"metric", std::string(MetricKindName(m.metric))},
                {"threshold_enabled", m.threshold_enabled},
                {"softmax_negation", m.negate_distances},
                {"shared_encoder_init", m.shared_encoder_init}};
  const TrainConfig &t = c.train;
  j["train"] = {{"epochs", t.epochs},
                {"patience", t.patience},
                {"batch_size", t.batch_size},
                {"learning_rate", t.adam.learning_rate},
                {"beta1", t.adam.beta1},
                {"beta2", t.adam.beta2},
                {"adam_epsilon", t.adam.epsilon},
                {"validation_fraction", t.validation_fraction},
                {"gate_weight", t.gate_weight},
                {"tau_min", t.tau_min},
                {"tau_max", t.tau_max},
                {"float64_params", t.float64_params}};
  const EvalSettings &e = c.eval;
  j["eval"] = {{"oov", e.oov},
               {"seeds", e.seeds},
               {"k", e.k},
               {"negatives_ratio", e.negatives_ratio},
               {"mlp_hidden", e.mlp.hidden_dim},
               {"mlp_epochs", e.mlp.epochs},
               {"mlp_batch_size", e.mlp.batch_size},
               {"mlp_learning_rate", e.mlp.learning_rate}};
  return j;
}

std::string RunConfigToYaml(const RunConfig &c) {
  const nlohmann::ordered_json j = RunConfigToJson(c);
  YAML::Emitter out;
  out.SetDoublePrecision(12);
  out << YAML::BeginMap;
  out << YAML::Key << "profile" << YAML::Value << c.profile;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  for (const char *section : {"paths", "model", "train", "eval"}) {
    out << YAML::Key << section << YAML::Value << YAML::BeginMap;
    for (const auto &[key, value] : j[section].items()) {
      out << YAML::Key << key << YAML::Value;
      if (value.is_array()) {
        out << YAML::Flow << YAML::BeginSeq;
        for (const auto &v : value) {
          if (v.is_string()) {
            out << v.get<std::string>();
          } else {
            out << v.get<long long>();
          }
        }
        out << YAML::EndSeq;
      } else if (value.is_boolean()) {
        out << value.get<bool>();
      } else if (value.is_number_integer() || value.is_number_unsigned()) {
        out << value.get<long long>();
      } else if (value.is_number()) {
        out << value.get<double>();
      } else {
        out << value.get<std::string>();
      }
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

CompareConfig MakeCompareConfig(const RunConfig &config) {
  CompareConfig cc;
  cc.oov_settings = config.eval.oov;
  cc.seeds = config.eval.seeds;
  cc.k = config.eval.k;
  cc.model = config.model;
  cc.train = config.train;
  cc.mlp = config.eval.mlp;
  cc.mlp_negatives_ratio = config.eval.negatives_ratio;
  return cc;
}

EvalPaths MakeEvalPaths(const RunConfig &config) {
  EvalPaths p;
  p.kbs = config.paths.kbs;
  p.taxonomy = config.paths.taxonomy;
  p.embeddings = config.paths.embeddings;
  p.corpus = config.paths.dataset;
  p.map = config.paths.hm_table;
  p.embedding_dim = config.model.embedding_dim;
  return p;
}

}  // namespace kbslot::cli
