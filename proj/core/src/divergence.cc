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

#include "kbslot/divergence.h"

#include <random>

namespace kbslot {

void BregmanNet::set_epsilon(double eps) {
  if (!(eps > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
  }
  epsilon_ = eps;
}

double BregmanNet::operator()(const Vector &x) const {
  if (x.size() != dim_) {
    throw Error(ErrorCode::kShapeMismatch,
                "potential expects input size " + std::to_string(dim_));
  }
  return Forward(x, nullptr)(0);
}

RowVector BregmanNet::Forward(const Matrix &x, Trace *trace) const {
  Matrix a = x;
  if (trace != nullptr) {
    trace->activations.clear();
    trace->pre.clear();
  }
  for (size_t l = 0; l < weights_.size(); ++l) {
    Matrix z = weights_[l] * a;
    z.colwise() += biases_[l].col(0);
    if (trace != nullptr) {
      trace->activations.push_back(std::move(a));
      trace->pre.push_back(z);
    }
    a = z.cwiseMax(0.0);
  }
  return a.row(0);
}

void BregmanNet::Backward(const Trace &trace, const RowVector &coeff,
                          BatchPotential *grads, Matrix *d_input) const {
  auto *g = static_cast<BregmanNet *>(grads);
  Matrix d = coeff;
  for (int l = depth() - 1; l >= 0; --l) {
    d = d.cwiseProduct((trace.pre[l].array() > 0.0).cast<double>().matrix());
    if (g != nullptr) {
      g->weights_[l].noalias() += d * trace.activations[l].transpose();
      g->biases_[l].col(0) += d.rowwise().sum();
    }
    if (l > 0 || d_input != nullptr) d = weights_[l].transpose() * d;
  }
  if (d_input != nullptr) *d_input = std::move(d);
}

void BregmanNet::ForEachTensor(const std::string &prefix,
                               const TensorVisitor &fn) {
  for (size_t l = 0; l < weights_.size(); ++l) {
    fn(prefix + ".w" + std::to_string(l), weights_[l]);
    fn(prefix + ".b" + std::to_string(l), biases_[l]);
  }
}

void BregmanNet::ForEachTensor(const std::string &prefix,
                               const ConstTensorVisitor &fn) const {
  for (size_t l = 0; l < weights_.size(); ++l) {
    fn(prefix + ".w" + std::to_string(l), weights_[l]);
    fn(prefix + ".b" + std::to_string(l), biases_[l]);
  }
}

BregmanNet BregmanNet::ZerosLike() const {
  BregmanNet z = *this;
  for (auto &w : z.weights_) w.setZero();
  for (auto &b : z.biases_) b.setZero();
  return z;
}

BregmanNet InitBregman(int depth, int dim, uint64_t seed, double epsilon) {
  if (depth < 1 || dim < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "bregman net needs depth >= 1 and dim >= 1");
  }
  BregmanNet net;
  net.dim_ = dim;
  net.set_epsilon(epsilon);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int l = 0; l < depth; ++l) {
    const int rows = (l + 1 == depth) ? 1 : dim;
    // Orthonormalize the longer side: Q from a dim x dim Gaussian, keep
    // `rows` of its rows. Sign-fix with R's diagonal for a uniform draw.
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) g(i, j) = normal(rng);
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j) {
      if (r(j, j) < 0) q.col(j) = -q.col(j);
    }
    Matrix w = q.topRows(rows);
    // The scoring row reads rectified activations; orienting it
    // non-negative keeps the rectified output alive at the start.
    if (rows == 1 && depth > 1) w = w.cwiseAbs();
    RoundToFloat(w);
    net.weights_.push_back(std::move(w));
    net.biases_.push_back(Matrix::Zero(rows, 1));
  }
  return net;
}

RowVector QuadraticPotential::Forward(const Matrix &x, Trace *trace) const {
  if (trace != nullptr) {
    trace->activations = {x};
    trace->pre.clear();
  }
  return scale_ * x.colwise().squaredNorm();
}

void QuadraticPotential::Backward(const Trace &trace, const RowVector &coeff,
                                  BatchPotential * /*grads*/,
                                  Matrix *d_input) const {
  if (d_input == nullptr) return;
  const Matrix &x = trace.activations.front();
  *d_input = x * (2.0 * scale_ * coeff.asDiagonal());
}

namespace {

// Column layout per pair k (stride 2d + 2): x_k, y_k, y_k + eps e_j (d of
// them), y_k - eps e_j (d of them).
Matrix StackProbes(const Matrix &x, const Matrix &y, double eps) {
  const Eigen::Index d = x.rows();
  const Eigen::Index stride = 2 * d + 2;
  Matrix probes(d, stride * x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const Eigen::Index base = k * stride;
    probes.col(base) = x.col(k);
    probes.col(base + 1) = y.col(k);
    for (Eigen::Index j = 0; j < d; ++j) {
      probes.col(base + 2 + j) = y.col(k);
      probes(j, base + 2 + j) += eps;
      probes.col(base + 2 + d + j) = y.col(k);
      probes(j, base + 2 + d + j) -= eps;
    }
  }
  return probes;
}

}  // namespace

Vector BregmanDistances(const BatchPotential &potential, const Matrix &x,
                        const Matrix &y, double eps, BregmanBatchTrace *trace) {
  if (x.rows() != potential.dim() || y.rows() != potential.dim() ||
      x.cols() != y.cols()) {
    throw Error(ErrorCode::kShapeMismatch,
                "bregman batch inputs do not match the potential size");
  }
  const Eigen::Index d = x.rows();
  const Eigen::Index stride = 2 * d + 2;
  BatchPotential::Trace local;
  RowVector values =
      potential.Forward(StackProbes(x, y, eps), trace ? &trace->potential : &local);
  Vector dist(x.cols());
  Matrix sdq(d, x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const Eigen::Index base = k * stride;
    for (Eigen::Index j = 0; j < d; ++j) {
      sdq(j, k) = (values(base + 2 + j) - values(base + 2 + d + j)) / (2.0 * eps);
    }
    dist(k) = values(base) - values(base + 1) - (x.col(k) - y.col(k)).dot(sdq.col(k));
  }
  if (trace != nullptr) {
    trace->x = x;
    trace->y = y;
    trace->sdq = std::move(sdq);
  }
  return dist;
}

void BregmanDistancesBackward(const BatchPotential &potential,
                              const BregmanBatchTrace &trace, double eps,
                              const Vector &d_dist, BatchPotential *grads,
                              Matrix *d_x, Matrix *d_y) {
  const Eigen::Index d = trace.x.rows();
  const Eigen::Index pairs = trace.x.cols();
  const Eigen::Index stride = 2 * d + 2;
  RowVector coeff(stride * pairs);
  for (Eigen::Index k = 0; k < pairs; ++k) {
    const Eigen::Index base = k * stride;
    coeff(base) = d_dist(k);
    coeff(base + 1) = -d_dist(k);
    for (Eigen::Index j = 0; j < d; ++j) {
      double w = d_dist(k) * (trace.x(j, k) - trace.y(j, k)) / (2.0 * eps);
      coeff(base + 2 + j) = -w;
      coeff(base + 2 + d + j) = w;
    }
  }
  Matrix d_probes;
  potential.Backward(trace.potential, coeff, grads, &d_probes);
  Matrix dx(d, pairs);
  Matrix dy(d, pairs);
  for (Eigen::Index k = 0; k < pairs; ++k) {
    const Eigen::Index base = k * stride;
    Vector g = d_dist(k) * trace.sdq.col(k);
    dx.col(k) = d_probes.col(base) - g;
    dy.col(k) = d_probes.col(base + 1) + g +
                d_probes.middleCols(base + 2, 2 * d).rowwise().sum();
  }
  if (d_x != nullptr) *d_x = std::move(dx);
  if (d_y != nullptr) *d_y = std::move(dy);
}

MetricKind ParseMetricKind(std::string_view name) {
  if (name == "bregman") return MetricKind::kBregman;
  if (name == "sq_euclidean") return MetricKind::kSqEuclidean;
  if (name == "sq_difference") return MetricKind::kSqDifference;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown metric '" + std::string(name) + "'");
}

std::string_view MetricKindName(MetricKind kind) {
  switch (kind) {
    case MetricKind::kBregman: return "bregman";
    case MetricKind::kSqEuclidean: return "sq_euclidean";
    case MetricKind::kSqDifference: return "sq_difference";
  }
  return "unknown";
}

double AblationMetric(MetricKind kind, const Vector &x, const Vector &y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kShapeMismatch, "metric arguments differ in size");
  }
  switch (kind) {
    case MetricKind::kSqEuclidean: return (x - y).squaredNorm();
    case MetricKind::kSqDifference: {
      double s = (x - y).sum();
      return s * s;
    }
    case MetricKind::kBregman: break;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "ablation metric must be sq_euclidean or sq_difference");
}

}  // namespace kbslot
