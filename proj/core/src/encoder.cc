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

#include "kbslot/encoder.h"

#include <cmath>

#include "kbslot/error.h"

namespace kbslot {
namespace {

double Sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

LstmDirection InitDirection(int in, int h, std::mt19937_64 &rng) {
  LstmDirection d;
  d.w_input.resize(4 * h, in);
  d.w_recurrent.resize(4 * h, h);
  d.bias = Matrix::Zero(4 * h, 1);
  auto xavier = [&rng](Matrix &m, int row0, int rows, int fan_in) {
    double limit = std::sqrt(6.0 / (fan_in + rows));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (int r = row0; r < row0 + rows; ++r) {
      for (int c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
    }
  };
  for (int g = 0; g < 4; ++g) {
    xavier(d.w_input, g * h, h, in);
    xavier(d.w_recurrent, g * h, h, h);
  }
  RoundToFloat(d.w_input);
  RoundToFloat(d.w_recurrent);
  return d;
}

LstmDirection ZerosDirection(const LstmDirection &d) {
  return {Matrix::Zero(d.w_input.rows(), d.w_input.cols()),
          Matrix::Zero(d.w_recurrent.rows(), d.w_recurrent.cols()),
          Matrix::Zero(d.bias.rows(), d.bias.cols())};
}

// x is already in processing order. Returns h x len hidden states.
Matrix RunDirection(const LstmDirection &p, int h, const Matrix &x,
                    const Vector &mask, LstmTrace *trace) {
  const int len = static_cast<int>(x.rows());
  Matrix hidden(h, len);
  Matrix gates(4 * h, len);
  Matrix cells(h, len);
  Matrix cell_tanh(h, len);
  // Input contributions for all steps at once.
  Matrix pre = p.w_input * x.transpose();
  pre.colwise() += p.bias.col(0);
  Vector h_prev = Vector::Zero(h);
  Vector c_prev = Vector::Zero(h);
  for (int t = 0; t < len; ++t) {
    Vector a = pre.col(t) + p.w_recurrent * h_prev.cwiseProduct(mask);
    for (int j = 0; j < h; ++j) {
      gates(j, t) = Sigmoid(a(j));
      gates(h + j, t) = Sigmoid(a(h + j));
      gates(2 * h + j, t) = std::tanh(a(2 * h + j));
      gates(3 * h + j, t) = Sigmoid(a(3 * h + j));
      double c = gates(h + j, t) * c_prev(j) + gates(j, t) * gates(2 * h + j, t);
      cells(j, t) = c;
      cell_tanh(j, t) = std::tanh(c);
      hidden(j, t) = gates(3 * h + j, t) * cell_tanh(j, t);
    }
    h_prev = hidden.col(t);
    c_prev = cells.col(t);
  }
  if (trace != nullptr) {
    trace->x = x;
    trace->gates = std::move(gates);
    trace->cells = std::move(cells);
    trace->cell_tanh = std::move(cell_tanh);
    trace->mask = mask;
  }
  return hidden;
}

// d_hidden is h x len in processing order. Returns d(x) (len x input).
Matrix BackwardDirection(const LstmDirection &p, int h, const LstmTrace &tr,
                         const Matrix &d_hidden, LstmDirection *g) {
  const int len = static_cast<int>(tr.x.rows());
  Matrix d_pre(4 * h, len);
  Vector dh_next = Vector::Zero(h);
  Vector dc_next = Vector::Zero(h);
  for (int t = len - 1; t >= 0; --t) {
    Vector dh = d_hidden.col(t) + dh_next;
    for (int j = 0; j < h; ++j) {
      double i = tr.gates(j, t);
      double f = tr.gates(h + j, t);
      double gg = tr.gates(2 * h + j, t);
      double o = tr.gates(3 * h + j, t);
      double tc = tr.cell_tanh(j, t);
      double c_prev = t > 0 ? tr.cells(j, t - 1) : 0.0;
      double dc = dc_next(j) + dh(j) * o * (1.0 - tc * tc);
      d_pre(j, t) = dc * gg * i * (1.0 - i);
      d_pre(h + j, t) = dc * c_prev * f * (1.0 - f);
      d_pre(2 * h + j, t) = dc * i * (1.0 - gg * gg);
      d_pre(3 * h + j, t) = dh(j) * tc * o * (1.0 - o);
      dc_next(j) = dc * f;
    }
    dh_next = (p.w_recurrent.transpose() * d_pre.col(t)).cwiseProduct(tr.mask);
  }
  // Masked previous hidden states, one column per step.
  Matrix h_prev = Matrix::Zero(h, len);
  for (int t = 1; t < len; ++t) {
    for (int j = 0; j < h; ++j) {
      h_prev(j, t) = tr.gates(3 * h + j, t - 1) * tr.cell_tanh(j, t - 1) *
                     tr.mask(j);
    }
  }
  g->w_input.noalias() += d_pre * tr.x;
  g->w_recurrent.noalias() += d_pre * h_prev.transpose();
  g->bias.col(0) += d_pre.rowwise().sum();
  return d_pre.transpose() * p.w_input;
}

Vector DrawMask(int h, double dropout, bool training, std::mt19937_64 *rng) {
  Vector mask = Vector::Ones(h);
  if (!training || dropout <= 0.0) return mask;
  if (rng == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "dropout in training mode needs a random stream");
  }
  std::bernoulli_distribution keep(1.0 - dropout);
  for (int j = 0; j < h; ++j) mask(j) = keep(*rng) ? 1.0 / (1.0 - dropout) : 0.0;
  return mask;
}

}  // namespace

void BiLstmParams::ForEachTensor(const std::string &prefix,
                                 const TensorVisitor &fn) {
  fn(prefix + ".fwd.w_input", forward.w_input);
  fn(prefix + ".fwd.w_recurrent", forward.w_recurrent);
  fn(prefix + ".fwd.bias", forward.bias);
  fn(prefix + ".bwd.w_input", backward.w_input);
  fn(prefix + ".bwd.w_recurrent", backward.w_recurrent);
  fn(prefix + ".bwd.bias", backward.bias);
}

void BiLstmParams::ForEachTensor(const std::string &prefix,
                                 const ConstTensorVisitor &fn) const {
  fn(prefix + ".fwd.w_input", forward.w_input);
  fn(prefix + ".fwd.w_recurrent", forward.w_recurrent);
  fn(prefix + ".fwd.bias", forward.bias);
  fn(prefix + ".bwd.w_input", backward.w_input);
  fn(prefix + ".bwd.w_recurrent", backward.w_recurrent);
  fn(prefix + ".bwd.bias", backward.bias);
}

BiLstmParams BiLstmParams::ZerosLike() const {
  BiLstmParams z = *this;
  z.forward = ZerosDirection(forward);
  z.backward = ZerosDirection(backward);
  return z;
}

BiLstmParams InitBiLstm(int input_dim, int hidden_dim, double dropout,
                        uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "BiLSTM dimensions must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "recurrent dropout must lie in [0, 1)");
  }
  std::mt19937_64 rng(seed);
  BiLstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.recurrent_dropout = dropout;
  p.forward = InitDirection(input_dim, hidden_dim, rng);
  p.backward = InitDirection(input_dim, hidden_dim, rng);
  return p;
}

Matrix Encode(const BiLstmParams &params, const Matrix &x, bool training,
              std::mt19937_64 *rng, BiLstmTrace *trace) {
  if (x.cols() != params.input_dim) {
    throw Error(ErrorCode::kShapeMismatch,
                "encoder expects " + std::to_string(params.input_dim) +
                    " input columns, got " + std::to_string(x.cols()));
  }
  if (x.rows() < 1) {
    throw Error(ErrorCode::kShapeMismatch, "encoder input is empty");
  }
  const int h = params.hidden_dim;
  const int len = static_cast<int>(x.rows());
  Vector fwd_mask = DrawMask(h, params.recurrent_dropout, training, rng);
  Vector bwd_mask = DrawMask(h, params.recurrent_dropout, training, rng);
  Matrix fwd = RunDirection(params.forward, h, x, fwd_mask,
                            trace ? &trace->forward : nullptr);
  Matrix reversed = x.colwise().reverse();
  Matrix bwd = RunDirection(params.backward, h, reversed, bwd_mask,
                            trace ? &trace->backward : nullptr);
  Matrix out(len, 2 * h);
  out.leftCols(h) = fwd.transpose();
  out.rightCols(h) = bwd.rowwise().reverse().transpose();
  return out;
}

void EncodeBackward(const BiLstmParams &params, const BiLstmTrace &trace,
                    const Matrix &d_output, BiLstmParams *grads,
                    Matrix *d_input) {
  const int h = params.hidden_dim;
  Matrix d_fwd = d_output.leftCols(h).transpose();
  Matrix d_bwd = d_output.rightCols(h).transpose().rowwise().reverse();
  Matrix dx_fwd =
      BackwardDirection(params.forward, h, trace.forward, d_fwd, &grads->forward);
  Matrix dx_bwd = BackwardDirection(params.backward, h, trace.backward, d_bwd,
                                    &grads->backward);
  if (d_input != nullptr) *d_input = dx_fwd + dx_bwd.colwise().reverse();
}

}  // namespace kbslot
