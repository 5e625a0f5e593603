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

#include "kbslot/checkpoint.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "json.hpp"
#include "kbslot/error.h"

namespace kbslot {
namespace {

using json = nlohmann::ordered_json;

constexpr char kManifest[] = "manifest.json";
constexpr char kBlob[] = "weights.bin";

json ModelConfigToJson(const ModelConfig &c) {
  json j;
  j["embedding_dim"] = c.embedding_dim;
  j["hidden_dim"] = c.hidden_dim;
  j["bregman_dim"] = c.bregman_dim;
  j["bregman_depth"] = c.bregman_depth;
  j["epsilon"] = c.epsilon;
  j["tau_init"] = c.tau_init;
  j["gate_sharpness"] = c.gate_sharpness;
  j["recurrent_dropout"] = c.recurrent_dropout;
  j["shared_encoder_init"] = c.shared_encoder_init;
  j["max_features"] = c.max_features;
  j["max_hypernyms"] = c.max_hypernyms;
  j["max_depth"] = c.max_depth;
  j["metric"] = std::string(MetricKindName(c.metric));
  j["threshold_enabled"] = c.threshold_enabled;
  j["negate_distances"] = c.negate_distances;
  j["potential"] = c.potential == PotentialKind::kLearned ? "learned" : "quadratic";
  j["quadratic_scale"] = c.quadratic_scale;
  return j;
}

ModelConfig ModelConfigFromJson(const json &j) {
  ModelConfig c;
  c.embedding_dim = j.at("embedding_dim").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.bregman_dim = j.at("bregman_dim").get<int>();
  c.bregman_depth = j.at("bregman_depth").get<int>();
  c.epsilon = j.at("epsilon").get<double>();
  c.tau_init = j.at("tau_init").get<double>();
  c.gate_sharpness = j.at("gate_sharpness").get<double>();
  c.recurrent_dropout = j.at("recurrent_dropout").get<double>();
  c.shared_encoder_init = j.value("shared_encoder_init", true);
  c.max_features = j.at("max_features").get<int>();
  c.max_hypernyms = j.at("max_hypernyms").get<int>();
  c.max_depth = j.at("max_depth").get<int>();
  c.metric = ParseMetricKind(j.at("metric").get<std::string>());
  c.threshold_enabled = j.at("threshold_enabled").get<bool>();
  c.negate_distances = j.at("negate_distances").get<bool>();
  c.potential = j.at("potential").get<std::string>() == "quadratic"
                    ? PotentialKind::kQuadratic
                    : PotentialKind::kLearned;
  c.quadratic_scale = j.at("quadratic_scale").get<double>();
  return c;
}

void AppendFloat(std::string &out, float v) {
  uint32_t bits = std::bit_cast<uint32_t>(v);
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

float ReadFloat(const std::string &blob, size_t offset) {
  uint32_t bits = 0;
  for (int b = 0; b < 4; ++b) {
    bits |= static_cast<uint32_t>(static_cast<unsigned char>(blob[offset + b])) << (8 * b);
  }
  return std::bit_cast<float>(bits);
}

uint32_t Crc(const char *data, size_t size) {
  return static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef *>(data), static_cast<uInt>(size)));
}

}  // namespace

void SaveCheckpoint(const Checkpoint &ckpt, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  std::string blob;
  json tensors = json::array();
  ckpt.model.ForEachTensor([&](const std::string &name, const Matrix &m) {
    const size_t offset = blob.size();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        AppendFloat(blob, static_cast<float>(m(r, c)));
      }
    }
    json t;
    t["name"] = name;
    t["shape"] = {m.rows(), m.cols()};
    t["offset"] = offset;
    t["crc32"] = Crc(blob.data() + offset, blob.size() - offset);
    tensors.push_back(std::move(t));
  });

  json manifest;
  manifest["format"] = "kbslot-checkpoint";
  manifest["format_version"] = kCheckpointVersion;
  manifest["config"] = json::parse(ckpt.config_json);
  manifest["model_config"] = ModelConfigToJson(ckpt.model.config());
  manifest["seed"] = ckpt.seed;
  manifest["best_epoch"] = ckpt.best_epoch;
  json history = json::array();
  for (const auto &m : ckpt.history) {
    json e;
    e["epoch"] = m.epoch;
    e["train_loss"] = m.train_loss;
    if (std::isfinite(m.validation_loss)) e["validation_loss"] = m.validation_loss;
    e["tau"] = m.tau;
    e["steps"] = m.steps;
    history.push_back(std::move(e));
  }
  manifest["metrics"] = std::move(history);
  manifest["blob"] = kBlob;
  manifest["blob_bytes"] = blob.size();
  manifest["tensors"] = std::move(tensors);

  std::ofstream blob_out(dir / kBlob, std::ios::binary | std::ios::trunc);
  blob_out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  std::ofstream manifest_out(dir / kManifest, std::ios::trunc);
  manifest_out << manifest.dump(2) << '\n';
  if (!blob_out || !manifest_out) {
    throw Error(ErrorCode::kInvalidArgument,
                "failed to write checkpoint to " + dir.string());
  }
}

Checkpoint LoadCheckpoint(const std::filesystem::path &dir) {
  std::ifstream manifest_in(dir / kManifest);
  if (!manifest_in) {
    throw Error(ErrorCode::kNotFound,
                "no checkpoint manifest in " + dir.string());
  }
  json manifest;
  try {
    manifest = json::parse(manifest_in);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kParse, std::string("bad checkpoint manifest: ") + e.what());
  }
  try {
    const int version = manifest.value("format_version", -1);
    if (version != kCheckpointVersion) {
      throw Error(ErrorCode::kVersion,
                  "checkpoint format version " + std::to_string(version) +
                      " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
    }
    std::ifstream blob_in(dir / manifest.at("blob").get<std::string>(),
                          std::ios::binary);
    if (!blob_in) throw Error(ErrorCode::kNotFound, "checkpoint blob missing");
    std::string blob((std::istreambuf_iterator<char>(blob_in)),
                     std::istreambuf_iterator<char>());
    if (blob.size() != manifest.at("blob_bytes").get<size_t>()) {
      throw Error(ErrorCode::kTruncated,
                  "checkpoint blob has " + std::to_string(blob.size()) +
                      " bytes, manifest says " +
                      std::to_string(manifest.at("blob_bytes").get<size_t>()));
    }

    struct Entry {
      size_t offset;
      Eigen::Index rows, cols;
    };
    std::map<std::string, Entry> table;
    for (const auto &t : manifest.at("tensors")) {
      Entry e{t.at("offset").get<size_t>(), t.at("shape").at(0).get<Eigen::Index>(),
              t.at("shape").at(1).get<Eigen::Index>()};
      const size_t bytes = static_cast<size_t>(e.rows * e.cols) * 4;
      if (e.offset + bytes > blob.size()) {
        throw Error(ErrorCode::kTruncated,
                    "tensor " + t.at("name").get<std::string>() + " runs past the blob");
      }
      if (Crc(blob.data() + e.offset, bytes) != t.at("crc32").get<uint32_t>()) {
        throw Error(ErrorCode::kChecksum,
                    "checksum mismatch in tensor " + t.at("name").get<std::string>());
      }
      table[t.at("name").get<std::string>()] = e;
    }

    Checkpoint ckpt;
    ckpt.model = ResolverModel(ModelConfigFromJson(manifest.at("model_config")), 0);
    ckpt.model.ForEachTensor([&](const std::string &name, Matrix &m) {
      auto it = table.find(name);
      if (it == table.end()) {
        throw Error(ErrorCode::kParse, "checkpoint lacks tensor " + name);
      }
      if (it->second.rows != m.rows() || it->second.cols != m.cols()) {
        throw Error(ErrorCode::kShapeMismatch, "tensor " + name + " has the wrong shape");
      }
      size_t offset = it->second.offset;
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c, offset += 4) {
          m(r, c) = ReadFloat(blob, offset);
        }
      }
    });
    ckpt.config_json = manifest.at("config").dump();
    ckpt.seed = manifest.at("seed").get<uint64_t>();
    ckpt.best_epoch = manifest.at("best_epoch").get<int>();
    for (const auto &e : manifest.at("metrics")) {
      EpochMetrics m;
      m.epoch = e.at("epoch").get<int>();
      m.train_loss = e.at("train_loss").get<double>();
      m.validation_loss = e.contains("validation_loss")
                              ? e.at("validation_loss").get<double>()
                              : std::numeric_limits<double>::quiet_NaN();
      m.tau = e.at("tau").get<double>();
      m.steps = e.at("steps").get<int>();
      ckpt.history.push_back(m);
    }
    return ckpt;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kParse, std::string("bad checkpoint manifest: ") + e.what());
  }
}

}  // namespace kbslot
