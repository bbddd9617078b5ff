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

#include "splitplan/error.hpp"

namespace splitplan {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonPositiveOutput: return "NonPositiveOutput";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kPairingError: return "PairingError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kZeroRate: return "ZeroRate";
    case ErrorCode::kMissingServerCompute: return "MissingServerCompute";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kUnreachable: return "Unreachable";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kStalledBreak: return "StalledBreak";
    case ErrorCode::kNoExcess: return "NoExcess";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kNoBracket: return "NoBracket";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace splitplan
