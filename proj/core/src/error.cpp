// Copyright 2026 The hsehqmm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hsehqmm/error.hpp"

namespace hqmm {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidArgument:
            return "E_ARG";
        case ErrorCode::kDimensionMismatch:
            return "E_DIM";
        case ErrorCode::kDegenerateState:
            return "E_DEGENERATE";
        case ErrorCode::kZeroProbability:
            return "E_ZERO_PROB";
        case ErrorCode::kSingularSystem:
            return "E_SINGULAR";
        case ErrorCode::kNotPositiveSemidefinite:
            return "E_NOT_PSD";
        case ErrorCode::kParse:
            return "E_PARSE";
        case ErrorCode::kConfig:
            return "E_CONFIG";
        case ErrorCode::kDivergence:
            return "E_DIVERGED";
        case ErrorCode::kIo:
            return "E_IO";
    }
    return "E_UNKNOWN";
}

}  // namespace hqmm
