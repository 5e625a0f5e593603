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

#include "kbslot/mlp_baseline.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "kbslot/error.h"
#include "kbslot/training.h"

namespace kbslot {
namespace {

Vector MeanEmbedding(const EmbeddingTable &emb,
                     const std::vector<std::string> &tokens) {
  Vector out = Vector::Zero(emb.dim());
  for (const auto &t : tokens) out += emb.Lookup(t);
  if (!tokens.empty()) out /= static_cast<double>(tokens.size());
  return out;
}

Matrix XavierUniform(int rows, int cols, std::mt19937_64 &rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> u(-limit, limit);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = u(rng);
  }
  return m;
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Labeled {
  Vector x;
  double y;
};

}  // namespace

Vector MlpFeatures(const EmbeddingTable &emb, const MapPair &pair) {
  const int d = emb.dim();
  Vector out(3 * d);
  out.segment(0, d) = MeanEmbedding(emb, SplitWords(pair.source_key));
  out.segment(d, d) = MeanEmbedding(emb, Tokenize(pair.value));
  out.segment(2 * d, d) = MeanEmbedding(emb, SplitWords(pair.target_key));
  return out;
}

MlpBaseline::MlpBaseline(int input_dim, int hidden_dim, uint64_t seed) {
  std::mt19937_64 rng(seed);
  w1_ = XavierUniform(hidden_dim, input_dim, rng);
  b1_ = Matrix::Zero(hidden_dim, 1);
  w2_ = XavierUniform(1, hidden_dim, rng);
  b2_ = Matrix::Zero(1, 1);
}

double MlpBaseline::ScoreFeatures(const Vector &features) const {
  Vector h = (w1_ * features + b1_.col(0)).cwiseMax(0.0);
  return Sigmoid((w2_ * h)(0, 0) + b2_(0, 0));
}

double MlpBaseline::Score(const EmbeddingTable &emb, const MapPair &pair) const {
  return ScoreFeatures(MlpFeatures(emb, pair));
}

struct MlpTrainer {
  static void Fit(MlpBaseline &m, const std::vector<Labeled> &data,
                  const MlpConfig &cfg, std::mt19937_64 &rng) {
    Matrix *params[] = {&m.w1_, &m.b1_, &m.w2_, &m.b2_};
    std::vector<Matrix> mom, vel;
    for (Matrix *p : params) {
      mom.push_back(Matrix::Zero(p->rows(), p->cols()));
      vel.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    std::vector<size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    int step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const size_t end = std::min(order.size(), start + cfg.batch_size);
        std::vector<Matrix> grads;
        for (Matrix *p : params) grads.push_back(Matrix::Zero(p->rows(), p->cols()));
        for (size_t i = start; i < end; ++i) {
          const Labeled &ex = data[order[i]];
          Vector pre = m.w1_ * ex.x + m.b1_.col(0);
          Vector h = pre.cwiseMax(0.0);
          const double p = Sigmoid((m.w2_ * h)(0, 0) + m.b2_(0, 0));
          const double dz = p - ex.y;  // d BCE / d logit
          grads[2] += dz * h.transpose();
          grads[3](0, 0) += dz;
          Vector dh = m.w2_.row(0).transpose() * dz;
          for (int j = 0; j < dh.size(); ++j) {
            if (pre(j) <= 0.0) dh(j) = 0.0;
          }
          grads[0] += dh * ex.x.transpose();
          grads[1].col(0) += dh;
        }
        ++step;
        const double scale = 1.0 / static_cast<double>(end - start);
        const double c1 = 1.0 - std::pow(b1, step);
        const double c2 = 1.0 - std::pow(b2, step);
        for (size_t k = 0; k < grads.size(); ++k) {
          Matrix g = grads[k] * scale;
          mom[k] = b1 * mom[k] + (1 - b1) * g;
          vel[k] = b2 * vel[k] + (1 - b2) * g.cwiseProduct(g);
          *params[k] -= (cfg.learning_rate * (mom[k] / c1).array() /
                         ((vel[k] / c2).array().sqrt() + eps))
                            .matrix();
        }
      }
    }
  }
};

MlpTrainResult TrainMlp(std::span<const MapPair> positives,
                        double negatives_ratio, const MlpConfig &config,
                        const EmbeddingTable &emb) {
  if (positives.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "mlp baseline needs at least one positive pair");
  }
  if (!(negatives_ratio > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "negatives_ratio must be positive; a single-class set cannot be trained");
  }
  if (config.hidden_dim <= 0 || config.epochs < 0 || config.batch_size <= 0 ||
      config.holdout_fraction < 0.0 || config.holdout_fraction >= 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid mlp config");
  }
  std::vector<std::string> targets;
  {
    std::set<std::string> seen;
    for (const auto &p : positives) {
      if (seen.insert(p.target_key).second) targets.push_back(p.target_key);
    }
  }
  if (targets.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "negative pairs need at least two distinct target keys");
  }

  std::mt19937_64 rng(config.seed);
  std::vector<Labeled> data;
  for (const auto &p : positives) data.push_back({MlpFeatures(emb, p), 1.0});
  const int n_neg = static_cast<int>(std::lround(negatives_ratio * positives.size()));
  std::vector<size_t> source_order(positives.size());
  std::iota(source_order.begin(), source_order.end(), 0);
  std::shuffle(source_order.begin(), source_order.end(), rng);
  std::uniform_int_distribution<size_t> pick(0, targets.size() - 1);
  for (int i = 0; i < n_neg; ++i) {
    MapPair neg = positives[source_order[i % source_order.size()]];
    std::string target;
    do {
      target = targets[pick(rng)];
    } while (target == neg.target_key);
    neg.target_key = target;
    data.push_back({MlpFeatures(emb, neg), 0.0});
  }
  std::shuffle(data.begin(), data.end(), rng);
  const size_t held = static_cast<size_t>(config.holdout_fraction * data.size());
  std::vector<Labeled> holdout(data.end() - held, data.end());
  data.resize(data.size() - held);

  MlpTrainResult result;
  result.model = MlpBaseline(3 * emb.dim(), config.hidden_dim, rng());
  result.positives = static_cast<int>(positives.size());
  result.negatives = n_neg;
  MlpTrainer::Fit(result.model, data, config, rng);
  if (holdout.empty()) {
    result.holdout_accuracy = std::numeric_limits<double>::quiet_NaN();
  } else {
    int right = 0;
    for (const auto &ex : holdout) {
      right += (result.model.ScoreFeatures(ex.x) >= 0.5) == (ex.y > 0.5);
    }
    result.holdout_accuracy = static_cast<double>(right) / holdout.size();
  }
  return result;
}

}  // namespace kbslot
