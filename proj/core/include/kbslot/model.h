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

#ifndef KBSLOT_MODEL_H_
#define KBSLOT_MODEL_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kbslot/divergence.h"
#include "kbslot/encoder.h"
#include "kbslot/kbstore.h"
#include "kbslot/taxonomy.h"
#include "kbslot/tensor.h"
#include "kbslot/textenc.h"

namespace kbslot {

enum class PotentialKind { kLearned, kQuadratic };

struct ModelConfig {
  int embedding_dim = 50;
  int hidden_dim = 32;
  // Bregman input size; pooled chunk vectors are padded/truncated to it.
  int bregman_dim = 64;
  int bregman_depth = 4;
  double epsilon = 1e-2;
  double tau_init = 0.75;
  double gate_sharpness = 50.0;
  double recurrent_dropout = 0.5;
  // Start the three encoders from one draw (they still train separately),
  // so F H^T and C H^T begin as similarity scores between encodings.
  bool shared_encoder_init = true;
  int max_features = 10;   // n: entries kept per KB
  int max_hypernyms = 9;   // m: hypernyms kept per field term
  int max_depth = 2;
  MetricKind metric = MetricKind::kBregman;
  bool threshold_enabled = true;
  // Softmax over -D so the closest key is the most probable one.
  bool negate_distances = true;
  // kQuadratic freezes P to quadratic_scale * ||v||^2 (oracle runs only).
  PotentialKind potential = PotentialKind::kLearned;
  double quadratic_scale = 0.5;

  void Validate() const;
};

// Read-only stores a prediction needs. Shared across threads.
struct Resources {
  const KbSet *kbs = nullptr;
  const TaxonomyGraph *taxonomy = nullptr;
  const EmbeddingTable *embeddings = nullptr;
};

class ResolverModel {
 public:
  ResolverModel() = default;
  explicit ResolverModel(const ModelConfig &config, uint64_t seed);

  const ModelConfig &config() const { return config_; }
  ModelConfig &mutable_config() { return config_; }

  BiLstmParams &feature_encoder() { return feature_encoder_; }
  BiLstmParams &key_encoder() { return key_encoder_; }
  BiLstmParams &context_encoder() { return context_encoder_; }
  BregmanNet &potential_net() { return potential_net_; }
  const BiLstmParams &feature_encoder() const { return feature_encoder_; }
  const BiLstmParams &key_encoder() const { return key_encoder_; }
  const BiLstmParams &context_encoder() const { return context_encoder_; }
  const BregmanNet &potential_net() const { return potential_net_; }

  double tau() const { return tau_(0, 0); }
  void set_tau(double tau);
  Matrix &tau_tensor() { return tau_; }

  // Potential actually used for distances (learned net or the quadratic).
  const BatchPotential &potential() const;

  void ForEachTensor(const TensorVisitor &fn);
  void ForEachTensor(const ConstTensorVisitor &fn) const;
  size_t ParameterCount() const;
  ResolverModel ZerosLike() const;
  void RoundParametersToFloat();

 private:
  ModelConfig config_;
  BiLstmParams feature_encoder_;
  BiLstmParams key_encoder_;
  BiLstmParams context_encoder_;
  BregmanNet potential_net_;
  QuadraticPotential quadratic_{1, 0.5};
  Matrix tau_ = Matrix::Constant(1, 1, 0.75);
};

struct Projections {
  Matrix feature;  // L_F x L_H
  Matrix context;  // L_C x L_H
};

// pi_F = F H^T and pi_C = C H^T.
Projections Project(const Matrix &f_enc, const Matrix &c_enc,
                    const Matrix &h_enc);

// Column i is the mean of pi's columns inside spans[i], zero padded or
// truncated to l_max rows. Spans must partition [0, pi.cols()).
Matrix ChunkAndPool(const Matrix &pi, std::span<const Span> spans, int l_max);

// Scatters d(pooled) back onto pi's columns.
Matrix ChunkAndPoolBackward(const Matrix &d_pooled, std::span<const Span> spans,
                            int rows, int cols);

// D_i = metric(c_i, f_i) over the columns of the pooled matrices.
Vector Distances(const ResolverModel &model, const Matrix &pooled_context,
                 const Matrix &pooled_features);

Vector Softmax(const Vector &logits);

// sigmoid(kappa * (p_i - tau)): a differentiable stand-in for the hard gate.
Vector SoftGate(const Vector &probs, double tau, double kappa);

// Indices with probs_i >= tau.
std::vector<int> HardGate(const Vector &probs, double tau);

// Everything derived from (value, context) before parameters are involved.
// Depends only on the frozen stores, so it can be computed once per example.
struct PreparedInput {
  std::string value;
  FeatureTensor features;
  FlatFeatures flat_features;
  KeyTensor keys;
  std::vector<std::string> context_tokens;
  Matrix feature_embed;
  Matrix key_embed;
  Matrix context_embed;
};

// Throws Error(kUnresolvable) when the lookup produces no keys.
PreparedInput PrepareInput(const Resources &res, const ModelConfig &config,
                           const std::string &value, const std::string &context);

struct ForwardTrace {
  BiLstmTrace feature_trace, key_trace, context_trace;
  Matrix f_enc, h_enc, c_enc;
  Projections pi;
  Matrix pooled_context, pooled_features;
  BregmanBatchTrace bregman;
  Vector distances;
  Vector logits;
  Vector probs;
};

// Full forward pass up to the key distribution.
Vector Forward(const ResolverModel &model, const PreparedInput &input,
               bool training, std::mt19937_64 *rng, ForwardTrace *trace);

// Accumulates d(loss)/d(params) into grads given d(loss)/d(logits).
void Backward(const ResolverModel &model, const PreparedInput &input,
              const ForwardTrace &trace, const Vector &d_logits,
              ResolverModel *grads);

struct Prediction {
  KeyTensor keys;
  Vector probs;
  std::vector<int> accepted;  // all keys when the gate is disabled
  int argmax = 0;             // first maximal key

  const std::string &argmax_key() const { return keys.keys[argmax]; }
  std::vector<std::string> accepted_keys() const;
};

Prediction PredictPrepared(const ResolverModel &model, const PreparedInput &input);

Prediction Predict(const ResolverModel &model, const Resources &res,
                   const std::string &value, const std::string &context);

}  // namespace kbslot

#endif  // KBSLOT_MODEL_H_
