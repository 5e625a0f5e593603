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

#ifndef KBSLOT_DIVERGENCE_H_
#define KBSLOT_DIVERGENCE_H_

#include <concepts>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kbslot/error.h"
#include "kbslot/tensor.h"

namespace kbslot {

// A scalar potential evaluated column-wise over a batch of inputs, with a
// backward pass weighted per column. The Bregman distance code only talks to
// this interface so that a fixed quadratic can stand in for the learned net.
class BatchPotential {
 public:
  struct Trace {
    std::vector<Matrix> activations;  // layer inputs, activations[0] = X
    std::vector<Matrix> pre;          // pre-activations per layer
  };

  virtual ~BatchPotential() = default;
  virtual int dim() const = 0;

  // X is dim x N. Returns 1 x N potentials.
  virtual RowVector Forward(const Matrix &x, Trace *trace) const = 0;

  // Backpropagates sum_n coeff(n) * P(x_n). Writes d/dX into d_input and, for
  // learnable potentials, accumulates parameter gradients into `grads`
  // (an object of the same concrete type, or null).
  virtual void Backward(const Trace &trace, const RowVector &coeff,
                        BatchPotential *grads, Matrix *d_input) const = 0;
};

// Feed-forward potential P: `depth` affine layers, hidden width = input
// width, rectifier after every layer including the scalar output.
class BregmanNet : public BatchPotential {
 public:
  BregmanNet() = default;

  int dim() const override { return dim_; }
  int depth() const { return static_cast<int>(weights_.size()); }
  double epsilon() const { return epsilon_; }
  void set_epsilon(double eps);

  std::vector<Matrix> &weights() { return weights_; }
  std::vector<Matrix> &biases() { return biases_; }
  const std::vector<Matrix> &weights() const { return weights_; }
  const std::vector<Matrix> &biases() const { return biases_; }

  double operator()(const Vector &x) const;

  RowVector Forward(const Matrix &x, Trace *trace) const override;
  void Backward(const Trace &trace, const RowVector &coeff,
                BatchPotential *grads, Matrix *d_input) const override;

  // epsilon is not a tensor: it is a fixed step, never trained.
  void ForEachTensor(const std::string &prefix, const TensorVisitor &fn);
  void ForEachTensor(const std::string &prefix,
                     const ConstTensorVisitor &fn) const;
  BregmanNet ZerosLike() const;

 private:
  friend BregmanNet InitBregman(int, int, uint64_t, double);

  int dim_ = 0;
  double epsilon_ = 1e-2;
  std::vector<Matrix> weights_;
  std::vector<Matrix> biases_;
};

// Orthonormal weight init (QR of a Gaussian matrix), zero biases.
BregmanNet InitBregman(int depth, int dim, uint64_t seed,
                       double epsilon = 1e-2);

// P(v) = scale * ||v||^2. scale = 1/2 gives B(x, y) = ||x - y||^2 / 2.
class QuadraticPotential : public BatchPotential {
 public:
  QuadraticPotential(int dim, double scale) : dim_(dim), scale_(scale) {}

  int dim() const override { return dim_; }
  double operator()(const Vector &x) const { return scale_ * x.squaredNorm(); }

  RowVector Forward(const Matrix &x, Trace *trace) const override;
  void Backward(const Trace &trace, const RowVector &coeff,
                BatchPotential *grads, Matrix *d_input) const override;

 private:
  int dim_;
  double scale_;
};

template <typename P>
concept ScalarPotential = requires(const P &p, const Vector &v) {
  { p(v) } -> std::convertible_to<double>;
};

// Central difference quotient of P around y, one coordinate at a time.
template <ScalarPotential P>
Vector SdqGradient(const P &potential, const Vector &y, double eps) {
  if (!(eps > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "SDQ step must be positive");
  }
  Vector grad(y.size());
  Vector probe = y;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    probe(j) = y(j) + eps;
    double up = potential(probe);
    probe(j) = y(j) - eps;
    double down = potential(probe);
    probe(j) = y(j);
    grad(j) = (up - down) / (2.0 * eps);
  }
  return grad;
}

// B(x, y) = P(x) - P(y) - <x - y, sdq(P, y)>.
template <ScalarPotential P>
double Bregman(const P &potential, const Vector &x, const Vector &y,
               double eps) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kShapeMismatch, "bregman arguments differ in size");
  }
  return potential(x) - potential(y) - (x - y).dot(SdqGradient(potential, y, eps));
}

// Batched B(x_k, y_k) for the columns of X and Y (dim x K). All 2*dim + 2
// potential evaluations per pair run as one batch.
struct BregmanBatchTrace {
  Matrix x, y;
  Matrix sdq;  // dim x K
  BatchPotential::Trace potential;
};

Vector BregmanDistances(const BatchPotential &potential, const Matrix &x,
                        const Matrix &y, double eps,
                        BregmanBatchTrace *trace = nullptr);

void BregmanDistancesBackward(const BatchPotential &potential,
                              const BregmanBatchTrace &trace, double eps,
                              const Vector &d_dist, BatchPotential *grads,
                              Matrix *d_x, Matrix *d_y);

enum class MetricKind { kBregman, kSqEuclidean, kSqDifference };

MetricKind ParseMetricKind(std::string_view name);
std::string_view MetricKindName(MetricKind kind);

// Fixed comparison metrics: sum_j (x_j - y_j)^2 and (sum_j (x_j - y_j))^2.
// kBregman is not a fixed metric and is rejected here.
double AblationMetric(MetricKind kind, const Vector &x, const Vector &y);

}  // namespace kbslot

#endif  // KBSLOT_DIVERGENCE_H_
