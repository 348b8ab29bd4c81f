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

#include "tissue_retract/env/policy.h"

namespace tissue_retract::env {

std::vector<Transition> Rollout(TissueRetractEnv& env, Policy& policy,
                                std::uint64_t seed) {
  std::vector<Transition> episode;
  episode.reserve(env.config().horizon);
  Observation obs = env.Reset(seed);
  policy.BeginEpisode(obs);
  while (!env.done()) {
    Transition tr = env.Step(policy.Act(obs));
    obs = tr.next_obs;
    episode.push_back(std::move(tr));
  }
  return episode;
}

}  // namespace tissue_retract::env
