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

#ifndef KBSLOT_ENCODER_H_
#define KBSLOT_ENCODER_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kbslot/tensor.h"

namespace kbslot {

// Weights of one LSTM direction. Gate rows are stacked in the order
// input, forget, cell, output; each block has hidden_dim rows.
struct LstmDirection {
  Matrix w_input;      // 4h x input_dim
  Matrix w_recurrent;  // 4h x h
  Matrix bias;         // 4h x 1
};

struct BiLstmParams {
  int input_dim = 0;
  int hidden_dim = 0;
  double recurrent_dropout = 0.0;
  LstmDirection forward;
  LstmDirection backward;

  int output_dim() const { return 2 * hidden_dim; }

  void ForEachTensor(const std::string &prefix, const TensorVisitor &fn);
  void ForEachTensor(const std::string &prefix,
                     const ConstTensorVisitor &fn) const;

  // Same shapes, all zeros. Used as a gradient accumulator.
  BiLstmParams ZerosLike() const;
};

// Xavier-uniform weight matrices (per gate block), zero biases.
BiLstmParams InitBiLstm(int input_dim, int hidden_dim, double dropout,
                        uint64_t seed);

// Per-direction intermediates kept for the backward pass.
struct LstmTrace {
  Matrix x;          // len x input, in processing order
  Matrix gates;      // 4h x len, post-activation
  Matrix cells;      // h x len
  Matrix cell_tanh;  // h x len
  Vector mask;       // h, recurrent dropout mask (scaled), ones if off
};

struct BiLstmTrace {
  LstmTrace forward;
  LstmTrace backward;
};

// Runs both directions and concatenates the per-position hidden states into
// a len x 2h matrix. When `training` is set and dropout is non-zero, one
// mask per direction is drawn from `rng` and applied to the recurrent state
// at every step. `trace` may be null when no backward pass follows.
Matrix Encode(const BiLstmParams &params, const Matrix &x, bool training,
              std::mt19937_64 *rng, BiLstmTrace *trace = nullptr);

// Accumulates parameter gradients into `grads` given d(loss)/d(output).
// `d_input` receives d(loss)/dx when non-null.
void EncodeBackward(const BiLstmParams &params, const BiLstmTrace &trace,
                    const Matrix &d_output, BiLstmParams *grads,
                    Matrix *d_input = nullptr);

}  // namespace kbslot

#endif  // KBSLOT_ENCODER_H_
