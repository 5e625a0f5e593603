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

#include "kbslot/training.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "kbslot/error.h"

namespace kbslot {

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    if (c < 128 && !std::isalnum(c)) {
      flush();
      continue;
    }
    if (c < 128 && std::isupper(c) && !current.empty()) {
      auto prev = static_cast<unsigned char>(text[i - 1]);
      bool next_lower = i + 1 < text.size() &&
                        std::islower(static_cast<unsigned char>(text[i + 1]));
      // "cityName" and the "N" in "USName" both start a word.
      if (std::islower(prev) || std::isdigit(prev) ||
          (std::isupper(prev) && next_lower)) {
        flush();
      }
    }
    current.push_back(c < 128 ? static_cast<char>(std::tolower(c))
                              : static_cast<char>(c));
  }
  flush();
  return words;
}

namespace {

size_t EditDistance(const std::string &a, const std::string &b) {
  std::vector<size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), size_t{0});
  for (size_t i = 1; i <= a.size(); ++i) {
    size_t diag = row[0];
    row[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                         diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string Join(const std::vector<std::string> &words) {
  std::string out;
  for (const auto &w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

}  // namespace

double FuzzyMatch(std::string_view label, std::string_view key) {
  std::vector<std::string> a = SplitWords(label);
  std::vector<std::string> b = SplitWords(key);
  if (a.empty() || b.empty()) return 0.0;
  std::set<std::string> sa(a.begin(), a.end());
  std::set<std::string> sb(b.begin(), b.end());
  size_t common = 0;
  for (const auto &w : sa) common += sb.count(w);
  double overlap = static_cast<double>(common) /
                   static_cast<double>(std::min(sa.size(), sb.size()));
  std::string ja = Join(a);
  std::string jb = Join(b);
  double edit = 1.0 - static_cast<double>(EditDistance(ja, jb)) /
                          static_cast<double>(std::max(ja.size(), jb.size()));
  return std::max(overlap, edit);
}

TargetDistribution BuildTarget(const KeyTensor &keys, const std::string &label) {
  if (keys.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot build a target over no keys");
  }
  TargetDistribution t;
  t.values = Vector::Zero(static_cast<Eigen::Index>(keys.size()));
  for (size_t i = 0; i < keys.size(); ++i) {
    if (IsFuzzyMatch(label, keys.keys[i])) t.matched.push_back(static_cast<int>(i));
  }
  if (t.matched.empty()) {
    throw Error(ErrorCode::kLabelNotInKeys,
                "label '" + label + "' not in key namespace");
  }
  for (int i : t.matched) t.values(i) = 1.0 / static_cast<double>(t.matched.size());
  return t;
}

double KlLoss(const Vector &predicted, const TargetDistribution &target) {
  if (predicted.size() != target.values.size()) {
    throw Error(ErrorCode::kShapeMismatch, "KL arguments differ in size");
  }
  double loss = 0.0;
  for (Eigen::Index i = 0; i < predicted.size(); ++i) {
    double t = target.values(i);
    if (t <= 0.0) continue;
    if (!(predicted(i) > 0.0)) {
      throw Error(ErrorCode::kSupportViolation,
                  "predicted probability is zero on the target support");
    }
    loss += t * std::log(t / predicted(i));
  }
  return loss;
}

void TrainConfig::Validate() const {
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (patience < 1) throw Error(ErrorCode::kInvalidArgument, "patience must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1");
  if (!(adam.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "validation fraction must lie in [0, 1)");
  }
  if (!(tau_min > 0.0 && tau_min < tau_max && tau_max < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tau clamp must satisfy 0 < min < max < 1");
  }
}

std::vector<PreparedExample> PrepareExamples(const Resources &res,
                                             const ModelConfig &config,
                                             const std::vector<SlotExample> &examples,
                                             int *skipped) {
  std::vector<PreparedExample> out;
  int dropped = 0;
  for (size_t i = 0; i < examples.size(); ++i) {
    const SlotExample &ex = examples[i];
    try {
      PreparedExample p;
      p.input = PrepareInput(res, config, ex.value, ex.context);
      p.target = BuildTarget(p.input.keys, ex.label);
      p.source_index = i;
      out.push_back(std::move(p));
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kUnresolvable &&
          e.code() != ErrorCode::kLabelNotInKeys) {
        throw;
      }
      ++dropped;
    }
  }
  if (skipped != nullptr) *skipped = dropped;
  return out;
}

double Loss(const ResolverModel &model, const PreparedExample &ex) {
  return KlLoss(Forward(model, ex.input, false, nullptr, nullptr), ex.target);
}

double LossAndGradient(const ResolverModel &model, const PreparedExample &ex,
                       ResolverModel *grads) {
  ForwardTrace trace;
  Vector probs = Forward(model, ex.input, false, nullptr, &trace);
  Backward(model, ex.input, trace, probs - ex.target.values, grads);
  return KlLoss(probs, ex.target);
}

namespace {

class Adam {
 public:
  Adam(ResolverModel *model, const AdamConfig &cfg) : cfg_(cfg) {
    model->ForEachTensor([this](const std::string &, Matrix &m) {
      params_.push_back(&m);
      first_.push_back(Matrix::Zero(m.rows(), m.cols()));
      second_.push_back(Matrix::Zero(m.rows(), m.cols()));
    });
  }

  void Step(ResolverModel *grads) {
    ++t_;
    std::vector<Matrix *> g;
    grads->ForEachTensor([&g](const std::string &, Matrix &m) { g.push_back(&m); });
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (size_t i = 0; i < params_.size(); ++i) {
      first_[i] = cfg_.beta1 * first_[i] + (1.0 - cfg_.beta1) * *g[i];
      second_[i] = cfg_.beta2 * second_[i] +
                   (1.0 - cfg_.beta2) * g[i]->cwiseProduct(*g[i]);
      params_[i]->array() -=
          cfg_.learning_rate * (first_[i].array() / c1) /
          ((second_[i].array() / c2).sqrt() + cfg_.epsilon);
    }
  }

 private:
  AdamConfig cfg_;
  int t_ = 0;
  std::vector<Matrix *> params_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
};

// Stratified hold-out: labels with at least two examples donate one example
// at a time, round robin, until the requested size is reached.
void SplitValidation(std::vector<PreparedExample> &all,
                     const std::vector<std::string> &labels, double fraction,
                     std::mt19937_64 &rng, std::vector<PreparedExample> *train,
                     std::vector<PreparedExample> *validation) {
  const size_t wanted = static_cast<size_t>(std::llround(fraction * all.size()));
  std::map<std::string, std::vector<size_t>> groups;
  std::vector<std::string> order;
  for (size_t i = 0; i < all.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(labels[i]);
    if (inserted) order.push_back(labels[i]);
    it->second.push_back(i);
  }
  for (auto &label : order) std::shuffle(groups[label].begin(), groups[label].end(), rng);
  std::vector<char> held(all.size(), 0);
  size_t taken = 0;
  for (size_t round = 0; taken < wanted; ++round) {
    bool progressed = false;
    for (const auto &label : order) {
      const auto &members = groups[label];
      // Never hold out the last remaining example of a label.
      if (members.size() < round + 2 || taken >= wanted) continue;
      held[members[round]] = 1;
      ++taken;
      progressed = true;
    }
    if (!progressed) break;
  }
  for (size_t i = 0; i < all.size(); ++i) {
    (held[i] ? validation : train)->push_back(std::move(all[i]));
  }
}

double MeanLoss(const ResolverModel &model,
                const std::vector<PreparedExample> &examples) {
  if (examples.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (const auto &ex : examples) sum += Loss(model, ex);
  return sum / static_cast<double>(examples.size());
}

TrainResult RunTraining(const ResolverModel &initial,
                        std::vector<PreparedExample> train,
                        std::vector<PreparedExample> validation,
                        const TrainConfig &cfg, const EpochCallback &on_epoch) {
  TrainResult result;
  result.train_examples = static_cast<int>(train.size());
  result.validation_examples = static_cast<int>(validation.size());
  ResolverModel model = initial;
  if (!cfg.float64_params) model.RoundParametersToFloat();
  ResolverModel grads = model.ZerosLike();
  Adam adam(&model, cfg.adam);
  std::mt19937_64 dropout_rng(cfg.seed * 2 + 1);
  std::mt19937_64 shuffle_rng(cfg.seed * 2 + 2);
  const ModelConfig &mcfg = model.config();

  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  int steps = 0;
  result.model = model;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      grads.ForEachTensor([](const std::string &, Matrix &m) { m.setZero(); });
      double d_tau = 0.0;
      for (size_t b = start; b < stop; ++b) {
        const PreparedExample &ex = train[order[b]];
        ForwardTrace trace;
        Vector probs = Forward(model, ex.input, true, &dropout_rng, &trace);
        double loss = KlLoss(probs, ex.target);
        if (!std::isfinite(loss)) {
          throw Error(ErrorCode::kNonFinite,
                      "non-finite loss at step " + std::to_string(steps + 1));
        }
        Backward(model, ex.input, trace, scale * (probs - ex.target.values),
                 &grads);
        if (mcfg.threshold_enabled && cfg.gate_weight > 0.0) {
          // Gate term sees the probabilities as constants; only tau moves.
          Vector gate = SoftGate(probs, model.tau(), mcfg.gate_sharpness);
          Vector on = (ex.target.values.array() > 0.0).cast<double>().matrix();
          d_tau += scale * cfg.gate_weight * (-mcfg.gate_sharpness) *
                   (gate - on).mean();
        }
      }
      grads.tau_tensor()(0, 0) = d_tau;
      adam.Step(&grads);
      ++steps;
      if (!cfg.float64_params) model.RoundParametersToFloat();
      model.set_tau(std::clamp(model.tau(), cfg.tau_min, cfg.tau_max));
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = MeanLoss(model, train);
    m.validation_loss = MeanLoss(model, validation);
    m.tau = model.tau();
    m.steps = steps;
    if (!std::isfinite(m.train_loss)) {
      throw Error(ErrorCode::kNonFinite,
                  "non-finite loss after step " + std::to_string(steps));
    }
    result.history.push_back(m);
    if (on_epoch) on_epoch(m);
    const double monitored = validation.empty() ? m.train_loss : m.validation_loss;
    if (monitored < best) {
      best = monitored;
      best_epoch = epoch;
      result.model = model;
    } else if (epoch - best_epoch >= cfg.patience) {
      result.early_stopped = true;
      break;
    }
  }
  result.best_epoch = best_epoch;
  return result;
}

}  // namespace

TrainResult TrainPrepared(const ResolverModel &initial,
                          std::vector<PreparedExample> examples,
                          const TrainConfig &config,
                          const EpochCallback &on_epoch) {
  config.Validate();
  if (examples.empty()) {
    throw Error(ErrorCode::kUnresolvable, "no trainable examples");
  }
  std::vector<std::string> labels;
  for (const auto &ex : examples) {
    std::string key;
    for (int i : ex.target.matched) key += ex.input.keys.keys[i] + "|";
    labels.push_back(key);
  }
  std::mt19937_64 split_rng(config.seed * 2 + 3);
  std::vector<PreparedExample> train, validation;
  SplitValidation(examples, labels, config.validation_fraction, split_rng,
                  &train, &validation);
  return RunTraining(initial, std::move(train), std::move(validation), config,
                     on_epoch);
}

TrainResult Train(const ResolverModel &initial,
                  const std::vector<SlotExample> &dataset,
                  const TrainConfig &config, const Resources &res,
                  const EpochCallback &on_epoch) {
  if (dataset.empty()) throw Error(ErrorCode::kInvalidArgument, "empty dataset");
  int skipped = 0;
  std::vector<PreparedExample> prepared =
      PrepareExamples(res, initial.config(), dataset, &skipped);
  if (prepared.empty()) {
    throw Error(ErrorCode::kUnresolvable,
                "all " + std::to_string(dataset.size()) +
                    " examples are unresolvable or outside the key namespace");
  }
  // Stratify on the original labels.
  std::vector<std::string> labels;
  for (const auto &p : prepared) labels.push_back(dataset[p.source_index].label);
  config.Validate();
  std::mt19937_64 split_rng(config.seed * 2 + 3);
  std::vector<PreparedExample> train, validation;
  SplitValidation(prepared, labels, config.validation_fraction, split_rng, &train,
                  &validation);
  TrainResult result = RunTraining(initial, std::move(train),
                                   std::move(validation), config, on_epoch);
  result.skipped_examples = skipped;
  return result;
}

GradCheckResult GradCheck(const ResolverModel &model, const PreparedExample &ex,
                          double h, int samples, uint64_t seed) {
  ResolverModel probe = model;
  ResolverModel grads = model.ZerosLike();
  LossAndGradient(probe, ex, &grads);

  std::vector<Matrix *> values;
  std::vector<Matrix *> analytic;
  probe.ForEachTensor([&values](const std::string &, Matrix &m) { values.push_back(&m); });
  grads.ForEachTensor([&analytic](const std::string &, Matrix &m) { analytic.push_back(&m); });
  std::vector<std::pair<size_t, Eigen::Index>> flat;
  for (size_t t = 0; t < values.size(); ++t) {
    for (Eigen::Index i = 0; i < values[t]->size(); ++i) flat.emplace_back(t, i);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(flat.begin(), flat.end(), rng);
  if (static_cast<int>(flat.size()) > samples) flat.resize(samples);

  constexpr double kFloor = 1e-6;
  GradCheckResult result;
  for (const auto &[t, i] : flat) {
    double &w = values[t]->data()[i];
    const double saved = w;
    w = saved + h;
    double up = Loss(probe, ex);
    w = saved - h;
    double down = Loss(probe, ex);
    w = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double exact = analytic[t]->data()[i];
    const double abs_err = std::abs(numeric - exact);
    const double scale = std::max(std::abs(numeric), std::abs(exact));
    double err;
    if (scale < kFloor) {
      ++result.absolute_fallbacks;
      err = abs_err <= kFloor ? 0.0 : abs_err / kFloor;
    } else {
      err = abs_err / scale;
    }
    result.max_relative_error = std::max(result.max_relative_error, err);
    ++result.checked;
  }
  return result;
}

}  // namespace kbslot
