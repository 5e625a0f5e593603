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

#ifndef KBSLOT_ERROR_H_
#define KBSLOT_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kbslot {

enum class ErrorCode {
  kInvalidArgument,
  kNotFound,
  kParse,
  kDuplicate,
  kShapeMismatch,
  kUnresolvable,       // value has no key namespace (empty lookup)
  kLabelNotInKeys,     // training label has no fuzzy match in the key tensor
  kSupportViolation,   // target mass on a zero-probability key
  kNonFinite,
  kChecksum,
  kVersion,
  kTruncated,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type. The code
// lets callers (the CLI in particular) map failures to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Parse failure in a line-oriented input file.
class ParseError : public Error {
 public:
  ParseError(std::string source, size_t line, const std::string &detail);

  const std::string &source() const { return source_; }
  size_t line() const { return line_; }

 private:
  std::string source_;
  size_t line_;
};

}  // namespace kbslot

#endif  // KBSLOT_ERROR_H_
