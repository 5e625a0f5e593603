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

#ifndef KBSLOT_CHECKPOINT_H_
#define KBSLOT_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kbslot/model.h"
#include "kbslot/training.h"

namespace kbslot {

inline constexpr int kCheckpointVersion = 1;

// A checkpoint directory holds manifest.json (format version, config echo,
// seed, best epoch, metric history and the tensor table with byte offsets
// and CRC32s) and weights.bin (little-endian float32 tensors, row-major, in
// manifest order).
struct Checkpoint {
  ResolverModel model;
  std::string config_json = "{}";  // run configuration echo, JSON object
  uint64_t seed = 0;
  int best_epoch = 0;
  std::vector<EpochMetrics> history;
};

void SaveCheckpoint(const Checkpoint &checkpoint,
                    const std::filesystem::path &dir);

// Validates version, sizes and every tensor checksum before building the
// model; nothing is returned on failure.
Checkpoint LoadCheckpoint(const std::filesystem::path &dir);

}  // namespace kbslot

#endif  // KBSLOT_CHECKPOINT_H_
