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

#include "kbslot/model.h"

#include <algorithm>
#include <cmath>

#include "kbslot/error.h"

namespace kbslot {

void ModelConfig::Validate() const {
  auto require = [](bool ok, const char *what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
  };
  require(embedding_dim >= 1, "embedding_dim must be positive");
  require(hidden_dim >= 1, "hidden_dim must be positive");
  require(bregman_dim >= 1, "bregman_dim must be positive");
  require(bregman_depth >= 1, "bregman_depth must be positive");
  require(epsilon > 0.0, "epsilon must be positive");
  require(tau_init > 0.0 && tau_init < 1.0, "tau must lie in (0, 1)");
  require(gate_sharpness > 0.0, "gate sharpness must be positive");
  require(recurrent_dropout >= 0.0 && recurrent_dropout < 1.0,
          "recurrent dropout must lie in [0, 1)");
  require(max_features >= 1, "max_features must be positive");
  require(max_hypernyms >= 1, "max_hypernyms must be positive");
  require(max_depth >= 1, "max_depth must be positive");
}

ResolverModel::ResolverModel(const ModelConfig &config, uint64_t seed)
    : config_(config) {
  config_.Validate();
  const uint64_t base = seed * 4 + 1;
  const uint64_t step = config.shared_encoder_init ? 0 : 1;
  feature_encoder_ = InitBiLstm(config.embedding_dim, config.hidden_dim,
                                config.recurrent_dropout, base);
  key_encoder_ = InitBiLstm(config.embedding_dim, config.hidden_dim,
                            config.recurrent_dropout, base + step);
  context_encoder_ = InitBiLstm(config.embedding_dim, config.hidden_dim,
                                config.recurrent_dropout, base + 2 * step);
  potential_net_ = InitBregman(config.bregman_depth, config.bregman_dim,
                               seed * 4 + 4, config.epsilon);
  quadratic_ = QuadraticPotential(config.bregman_dim, config.quadratic_scale);
  set_tau(config.tau_init);
}

void ResolverModel::set_tau(double tau) {
  tau_(0, 0) = static_cast<double>(static_cast<float>(tau));
}

const BatchPotential &ResolverModel::potential() const {
  if (config_.potential == PotentialKind::kQuadratic) return quadratic_;
  return potential_net_;
}

void ResolverModel::ForEachTensor(const TensorVisitor &fn) {
  feature_encoder_.ForEachTensor("feature_encoder", fn);
  key_encoder_.ForEachTensor("key_encoder", fn);
  context_encoder_.ForEachTensor("context_encoder", fn);
  potential_net_.ForEachTensor("bregman", fn);
  fn("tau", tau_);
}

void ResolverModel::ForEachTensor(const ConstTensorVisitor &fn) const {
  feature_encoder_.ForEachTensor("feature_encoder", fn);
  key_encoder_.ForEachTensor("key_encoder", fn);
  context_encoder_.ForEachTensor("context_encoder", fn);
  potential_net_.ForEachTensor("bregman", fn);
  fn("tau", tau_);
}

size_t ResolverModel::ParameterCount() const {
  size_t count = 0;
  ForEachTensor([&count](const std::string &, const Matrix &m) {
    count += static_cast<size_t>(m.size());
  });
  return count;
}

ResolverModel ResolverModel::ZerosLike() const {
  ResolverModel z = *this;
  z.ForEachTensor([](const std::string &, Matrix &m) { m.setZero(); });
  return z;
}

void ResolverModel::RoundParametersToFloat() {
  ForEachTensor([](const std::string &, Matrix &m) { RoundToFloat(m); });
}

Projections Project(const Matrix &f_enc, const Matrix &c_enc,
                    const Matrix &h_enc) {
  if (f_enc.cols() != h_enc.cols() || c_enc.cols() != h_enc.cols()) {
    throw Error(ErrorCode::kShapeMismatch,
                "projection inputs must share their feature width");
  }
  return {f_enc * h_enc.transpose(), c_enc * h_enc.transpose()};
}

namespace {

void CheckPartition(std::span<const Span> spans, Eigen::Index cols) {
  int next = 0;
  for (const Span &s : spans) {
    if (s.begin != next || s.end <= s.begin) {
      throw Error(ErrorCode::kInvalidArgument,
                  "key spans must be contiguous, non-empty and non-overlapping");
    }
    next = s.end;
  }
  if (next != cols) {
    throw Error(ErrorCode::kInvalidArgument,
                "key spans do not cover the projection columns");
  }
}

}  // namespace

Matrix ChunkAndPool(const Matrix &pi, std::span<const Span> spans, int l_max) {
  CheckPartition(spans, pi.cols());
  const Eigen::Index rows = std::min<Eigen::Index>(pi.rows(), l_max);
  Matrix pooled = Matrix::Zero(l_max, static_cast<Eigen::Index>(spans.size()));
  for (size_t i = 0; i < spans.size(); ++i) {
    const Span &s = spans[i];
    pooled.col(i).head(rows) =
        pi.block(0, s.begin, rows, s.width()).rowwise().mean();
  }
  return pooled;
}

Matrix ChunkAndPoolBackward(const Matrix &d_pooled, std::span<const Span> spans,
                            int rows, int cols) {
  Matrix d_pi = Matrix::Zero(rows, cols);
  const Eigen::Index kept = std::min<Eigen::Index>(rows, d_pooled.rows());
  for (size_t i = 0; i < spans.size(); ++i) {
    const Span &s = spans[i];
    for (int c = s.begin; c < s.end; ++c) {
      d_pi.col(c).head(kept) = d_pooled.col(i).head(kept) / s.width();
    }
  }
  return d_pi;
}

Vector Distances(const ResolverModel &model, const Matrix &pooled_context,
                 const Matrix &pooled_features) {
  if (pooled_context.cols() != pooled_features.cols() ||
      pooled_context.rows() != pooled_features.rows()) {
    throw Error(ErrorCode::kShapeMismatch,
                "context and feature chunks differ in count or size");
  }
  const ModelConfig &cfg = model.config();
  if (cfg.metric == MetricKind::kBregman) {
    return BregmanDistances(model.potential(), pooled_context, pooled_features,
                            cfg.epsilon);
  }
  Vector d(pooled_context.cols());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    d(i) = AblationMetric(cfg.metric, pooled_context.col(i),
                          pooled_features.col(i));
  }
  return d;
}

Vector Softmax(const Vector &logits) {
  Vector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

Vector SoftGate(const Vector &probs, double tau, double kappa) {
  if (!(kappa > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gate sharpness must be positive");
  }
  return (1.0 + (-kappa * (probs.array() - tau)).exp()).inverse().matrix();
}

std::vector<int> HardGate(const Vector &probs, double tau) {
  std::vector<int> accepted;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs(i) >= tau) accepted.push_back(static_cast<int>(i));
  }
  return accepted;
}

PreparedInput PrepareInput(const Resources &res, const ModelConfig &config,
                           const std::string &value,
                           const std::string &context) {
  PreparedInput in;
  in.value = value;
  in.features = Lookup(*res.kbs, value, config.max_features);
  in.keys = BuildKeyTensor(in.features, *res.taxonomy, config.max_hypernyms,
                           config.max_depth);
  if (in.keys.empty()) {
    std::string kbs;
    for (const auto &slice : in.features.per_kb) {
      kbs += (kbs.empty() ? "" : ",") + slice.kb_name + "=0";
    }
    throw Error(ErrorCode::kUnresolvable,
                "unresolvable value '" + value + "': empty lookup [" + kbs + "]");
  }
  in.flat_features = FlattenFeatures(in.features);
  in.context_tokens = Tokenize(context);
  const EmbeddingTable &emb = *res.embeddings;
  if (emb.dim() != config.embedding_dim) {
    throw Error(ErrorCode::kShapeMismatch,
                "embedding table dimension differs from the model config");
  }
  // A matched entry may carry no field text at all; an empty context is
  // legal too. Both become a single unknown-token row.
  auto embed = [&emb](const std::vector<std::string> &tokens) {
    if (tokens.empty()) return Matrix(Matrix::Zero(1, emb.dim()));
    return emb.EmbedSequence(tokens);
  };
  in.feature_embed = embed(in.flat_features.tokens);
  in.key_embed = emb.EmbedSequence(in.keys.tokens);
  in.context_embed = embed(in.context_tokens);
  return in;
}

Vector Forward(const ResolverModel &model, const PreparedInput &input,
               bool training, std::mt19937_64 *rng, ForwardTrace *trace) {
  ForwardTrace local;
  ForwardTrace &t = trace ? *trace : local;
  const ModelConfig &cfg = model.config();
  const bool keep = trace != nullptr;
  t.f_enc = Encode(model.feature_encoder(), input.feature_embed, training, rng,
                   keep ? &t.feature_trace : nullptr);
  t.h_enc = Encode(model.key_encoder(), input.key_embed, training, rng,
                   keep ? &t.key_trace : nullptr);
  t.c_enc = Encode(model.context_encoder(), input.context_embed, training, rng,
                   keep ? &t.context_trace : nullptr);
  t.pi = Project(t.f_enc, t.c_enc, t.h_enc);
  t.pooled_context = ChunkAndPool(t.pi.context, input.keys.spans, cfg.bregman_dim);
  t.pooled_features = ChunkAndPool(t.pi.feature, input.keys.spans, cfg.bregman_dim);
  if (cfg.metric == MetricKind::kBregman) {
    t.distances = BregmanDistances(model.potential(), t.pooled_context,
                                   t.pooled_features, cfg.epsilon,
                                   keep ? &t.bregman : nullptr);
  } else {
    t.distances = Distances(model, t.pooled_context, t.pooled_features);
  }
  t.logits = cfg.negate_distances ? Vector(-t.distances) : t.distances;
  t.probs = Softmax(t.logits);
  return t.probs;
}

void Backward(const ResolverModel &model, const PreparedInput &input,
              const ForwardTrace &t, const Vector &d_logits,
              ResolverModel *grads) {
  const ModelConfig &cfg = model.config();
  Vector d_dist = cfg.negate_distances ? Vector(-d_logits) : d_logits;
  Matrix d_pc, d_pf;
  if (cfg.metric == MetricKind::kBregman) {
    BatchPotential *pg = cfg.potential == PotentialKind::kLearned
                             ? &grads->potential_net()
                             : nullptr;
    BregmanDistancesBackward(model.potential(), t.bregman, cfg.epsilon, d_dist,
                             pg, &d_pc, &d_pf);
  } else {
    Matrix diff = t.pooled_context - t.pooled_features;
    if (cfg.metric == MetricKind::kSqEuclidean) {
      d_pc = 2.0 * diff * d_dist.asDiagonal();
    } else {
      RowVector sums = diff.colwise().sum();
      d_pc = Matrix::Ones(diff.rows(), diff.cols()) *
             (2.0 * sums.transpose().cwiseProduct(d_dist)).asDiagonal();
    }
    d_pf = -d_pc;
  }
  const auto &spans = input.keys.spans;
  Matrix d_pi_c = ChunkAndPoolBackward(d_pc, spans, t.pi.context.rows(),
                                       t.pi.context.cols());
  Matrix d_pi_f = ChunkAndPoolBackward(d_pf, spans, t.pi.feature.rows(),
                                       t.pi.feature.cols());
  Matrix d_f = d_pi_f * t.h_enc;
  Matrix d_c = d_pi_c * t.h_enc;
  Matrix d_h = d_pi_f.transpose() * t.f_enc + d_pi_c.transpose() * t.c_enc;
  EncodeBackward(model.feature_encoder(), t.feature_trace, d_f,
                 &grads->feature_encoder());
  EncodeBackward(model.key_encoder(), t.key_trace, d_h, &grads->key_encoder());
  EncodeBackward(model.context_encoder(), t.context_trace, d_c,
                 &grads->context_encoder());
}

std::vector<std::string> Prediction::accepted_keys() const {
  std::vector<std::string> out;
  for (int i : accepted) out.push_back(keys.keys[i]);
  return out;
}

Prediction PredictPrepared(const ResolverModel &model,
                           const PreparedInput &input) {
  Prediction p;
  p.keys = input.keys;
  p.probs = Forward(model, input, /*training=*/false, nullptr, nullptr);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < p.probs.size(); ++i) {
    if (p.probs(i) > p.probs(best)) best = i;
  }
  p.argmax = static_cast<int>(best);
  if (model.config().threshold_enabled) {
    p.accepted = HardGate(p.probs, model.tau());
  } else {
    p.accepted.resize(p.keys.size());
    for (size_t i = 0; i < p.keys.size(); ++i) p.accepted[i] = static_cast<int>(i);
  }
  return p;
}

Prediction Predict(const ResolverModel &model, const Resources &res,
                   const std::string &value, const std::string &context) {
  return PredictPrepared(model, PrepareInput(res, model.config(), value, context));
}

}  // namespace kbslot
