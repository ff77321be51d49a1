// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The csbeam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "csbeam/error.hpp"

namespace csbeam {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::kNyquistViolation: return "nyquist-violation";
    case ErrorKind::kOffBinFrequency: return "off-bin-frequency";
    case ErrorKind::kBlockTooLong: return "block-too-long";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kInfeasibleNonneg: return "infeasible-nonneg";
    case ErrorKind::kAllZeroMap: return "all-zero-map";
    case ErrorKind::kIndexOutOfRange: return "index-out-of-range";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace csbeam
