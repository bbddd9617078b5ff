// Copyright 2026 The splitplan Authors.
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

#ifndef SPLITPLAN_ERROR_HPP_
#define SPLITPLAN_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace splitplan {

enum class ErrorCode {
  kNonPositiveOutput,
  kShapeMismatch,
  kPairingError,
  kParseError,
  kValidationError,
  kDomainError,
  kZeroRate,
  kMissingServerCompute,
  kNonConvergence,
  kUnreachable,
  kInfeasible,
  kStalledBreak,
  kNoExcess,
  kTooLarge,
  kNoBracket,
  kIoError,
  kInvalidArgument,
};

/// Stable name used in machine-readable CLI errors, e.g. "ValidationError".
std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace splitplan

#endif  // SPLITPLAN_ERROR_HPP_
