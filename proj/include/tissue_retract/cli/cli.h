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


#ifndef TISSUE_RETRACT_CLI_CLI_H_
#define TISSUE_RETRACT_CLI_CLI_H_

// The tissue_retract command line: gen-demos, train, eval, ablate, replay.
//
// Settings come from built-in defaults, then an optional INI file, then
// command-line flags. INI sections are [env], [agent], [train], [demo] and
// [eval]; keys are dotted paths into the section's JSON form, e.g.
//
//   [env]
//   physics.grasp_break_force = 0.3
//   task.workspace = [-0.02, 0.02, -0.02, 0.02]
//
// Values are parsed as JSON where possible and as strings otherwise.

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "tissue_retract/agents/agent.h"
#include "tissue_retract/demo/demogen.h"
#include "tissue_retract/env/tissue_retract_env.h"
#include "tissue_retract/eval/eval.h"
#include "tissue_retract/training/trainer.h"

namespace tissue_retract::cli {

inline constexpr char kVersion[] = "0.1.0";

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct Settings {
  env::EnvConfig env;
  agents::AgentConfig agent;
  training::TrainConfig train;
  demo::DemoConfig demo;
  eval::FailureConfig failure;

  nlohmann::json ToJson() const;
};

// Applies INI overrides in place. Throws configuration-error for unknown
// sections or keys and for values of the wrong type.
void ApplyIni(std::istream& in, Settings& settings);
void ApplyIniFile(const std::string& path, Settings& settings);

// Runs one command. Never throws; returns the exit status.
int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace tissue_retract::cli

#endif  // TISSUE_RETRACT_CLI_CLI_H_
