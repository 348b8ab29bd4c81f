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

#ifndef TISSUE_RETRACT_ENV_JSON_IO_H_
#define TISSUE_RETRACT_ENV_JSON_IO_H_

// JSON mappings for environment records and configuration. Vectors are
// arrays of decimal floats; doubles are written with round-trip precision.

#include <string>

#include "json.hpp"
#include "tissue_retract/env/tissue_retract_env.h"

namespace tissue_retract::env {

void to_json(nlohmann::json& j, const Observation& obs);
void from_json(const nlohmann::json& j, Observation& obs);
void to_json(nlohmann::json& j, const Action& action);
void from_json(const nlohmann::json& j, Action& action);
void to_json(nlohmann::json& j, const StepInfo& info);
void from_json(const nlohmann::json& j, StepInfo& info);
void to_json(nlohmann::json& j, const Transition& tr);
void from_json(const nlohmann::json& j, Transition& tr);

void to_json(nlohmann::json& j, const TaskSpec& task);
void from_json(const nlohmann::json& j, TaskSpec& task);
void to_json(nlohmann::json& j, const EnvConfig& config);
void from_json(const nlohmann::json& j, EnvConfig& config);

// First 16 hex digits of the SHA-256 of the canonical JSON config dump.
std::string ConfigHash(const EnvConfig& config);

}  // namespace tissue_retract::env

namespace tissue_retract {
nlohmann::json Vec3ToJson(const Vec3& v);
Vec3 Vec3FromJson(const nlohmann::json& j);
}  // namespace tissue_retract

#endif  // TISSUE_RETRACT_ENV_JSON_IO_H_
