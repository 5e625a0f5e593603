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

#include "kbslot/error.h"

namespace kbslot {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDuplicate: return "duplicate";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kUnresolvable: return "unresolvable";
    case ErrorCode::kLabelNotInKeys: return "label_not_in_keys";
    case ErrorCode::kSupportViolation: return "support_violation";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kChecksum: return "checksum";
    case ErrorCode::kVersion: return "version";
    case ErrorCode::kTruncated: return "truncated";
  }
  return "unknown";
}

ParseError::ParseError(std::string source, size_t line,
                       const std::string &detail)
    : Error(ErrorCode::kParse,
            source + ":" + std::to_string(line) + ": " + detail),
      source_(std::move(source)),
      line_(line) {}

}  // namespace kbslot
