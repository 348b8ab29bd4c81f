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

#ifndef TISSUE_RETRACT_ENV_POLICY_H_
#define TISSUE_RETRACT_ENV_POLICY_H_

#include <cstdint>
#include <vector>

#include "tissue_retract/env/tissue_retract_env.h"

namespace tissue_retract::env {

// Anything that maps observations to actions over an episode.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void BeginEpisode(const Observation& first) { (void)first; }
  virtual Action Act(const Observation& obs) = 0;
};

// Resets `env` with `seed` and steps `policy` until the episode ends.
std::vector<Transition> Rollout(TissueRetractEnv& env, Policy& policy,
                                std::uint64_t seed);

}  // namespace tissue_retract::env

#endif  // TISSUE_RETRACT_ENV_POLICY_H_
