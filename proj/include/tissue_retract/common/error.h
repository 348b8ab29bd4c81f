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

#ifndef TISSUE_RETRACT_COMMON_ERROR_H_
#define TISSUE_RETRACT_COMMON_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace tissue_retract {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateGeometry,
  kSimulationDiverged,
  kIkFailed,
  kEpisodeFinished,
  kConfigurationError,
  kInvalidState,
  kOptimizerDiverged,
  kTrainingDiverged,
  kInsufficientData,
  kDemoGenerationFailed,
  kCheckpointIncompatible,
  kParseError,
};

std::string_view ErrorCodeName(ErrorCode code);

// Base error for every failure the library reports. The code identifies the
// failure class; the message carries the details.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Throws Error(code, message) when `condition` is false.
inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace tissue_retract

#endif  // TISSUE_RETRACT_COMMON_ERROR_H_
