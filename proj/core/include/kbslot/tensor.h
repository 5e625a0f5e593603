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

#ifndef KBSLOT_TENSOR_H_
#define KBSLOT_TENSOR_H_

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace kbslot {

// All arithmetic runs in double precision. Parameters are additionally kept
// representable in 32-bit floats (see RoundToFloat) so checkpoints, which
// store float32, round-trip bit-exactly.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Half-open token interval [begin, end) in a flattened sequence.
struct Span {
  int begin = 0;
  int end = 0;

  int width() const { return end - begin; }
  bool operator==(const Span &) const = default;
};

// Visits a named parameter tensor. Every trainable (and checkpointed) tensor
// of a model is exposed through one of these so optimizers, checkpoints and
// gradient checks can treat the model as a flat list.
using TensorVisitor = std::function<void(const std::string &name, Matrix &m)>;
using ConstTensorVisitor =
    std::function<void(const std::string &name, const Matrix &m)>;

inline void RoundToFloat(Matrix &m) {
  m = m.cast<float>().cast<double>();
}

}  // namespace kbslot

#endif  // KBSLOT_TENSOR_H_
