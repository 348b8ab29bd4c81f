// Copyright 2026 The TissueRetract Authors
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

#include "tissue_retract/common/error.h"

namespace tissue_retract {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::kSimulationDiverged: return "simulation-diverged";
    case ErrorCode::kIkFailed: return "ik-failed";
    case ErrorCode::kEpisodeFinished: return "episode-finished";
    case ErrorCode::kConfigurationError: return "configuration-error";
    case ErrorCode::kInvalidState: return "invalid-state";
    case ErrorCode::kOptimizerDiverged: return "optimizer-diverged";
    case ErrorCode::kTrainingDiverged: return "training-diverged";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kDemoGenerationFailed: return "demo-generation-failed";
    case ErrorCode::kCheckpointIncompatible: return "checkpoint-incompatible";
    case ErrorCode::kParseError: return "parse-error";
  }
  return "unknown";
}

}  // namespace tissue_retract
