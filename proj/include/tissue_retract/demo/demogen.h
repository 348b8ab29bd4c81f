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

#ifndef TISSUE_RETRACT_DEMO_DEMOGEN_H_
#define TISSUE_RETRACT_DEMO_DEMOGEN_H_

// Rule-based expert for the retraction tasks. Each episode is split into
// four position checkpoints: approach above the anchor, descend onto it and
// close the jaw, pull the anchor to the goal, then hold.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tissue_retract/env/policy.h"
#include "tissue_retract/env/tissue_retract_env.h"

namespace tissue_retract::demo {

struct DemoConfig {
  double clearance = 0.02;
  double advance_tolerance = 0.003;
  int hold_steps = 3;
  // Rollouts allowed per requested episode before giving up.
  int attempts_per_episode = 3;
};

struct CheckpointPlan {
  Vec3 p1_approach = Vec3::Zero();
  Vec3 p2_grasp = Vec3::Zero();
  Vec3 p3_retract = Vec3::Zero();
  Vec3 p4_hold = Vec3::Zero();
  int hold_steps = 0;
};

enum class Phase { kApproach = 0, kGrasp = 1, kRetract = 2, kHold = 3 };

struct PhaseState {
  Phase phase = Phase::kApproach;
  int held_steps = 0;
};

CheckpointPlan MakePlan(const env::Observation& obs, const DemoConfig& config);

// One expert action. Approach and grasp checkpoints are tracked with the end
// effector; retract and hold track the grasped anchor. Reaching a checkpoint
// (within advance_tolerance) advances the phase and emits a zero delta.
env::Action NextAction(const env::Observation& obs, const CheckpointPlan& plan,
                       PhaseState& state, const DemoConfig& config,
                       double max_step);

class ScriptedPolicy : public env::Policy {
 public:
  ScriptedPolicy(DemoConfig config, double max_step)
      : config_(config), max_step_(max_step) {}

  void BeginEpisode(const env::Observation& first) override;
  env::Action Act(const env::Observation& obs) override;

  const CheckpointPlan& plan() const { return plan_; }
  const PhaseState& state() const { return state_; }

 private:
  DemoConfig config_;
  double max_step_;
  CheckpointPlan plan_;
  PhaseState state_;
};

struct DemoEpisode {
  std::uint64_t seed = 0;
  std::vector<env::Transition> transitions;
};

struct CorpusManifest {
  env::TaskId task = env::TaskId::kI;
  std::uint64_t seed = 0;
  int episodes = 0;
  int attempts = 0;
  int transitions = 0;
  std::string config_hash;
};

struct DemoCorpus {
  CorpusManifest manifest;
  std::vector<DemoEpisode> episodes;

  // Fraction of rollouts that succeeded before filtering.
  double SuccessFraction() const;
  double MeanEpisodeLength() const;
  // The first n episodes, with the manifest counts adjusted.
  DemoCorpus Prefix(int n) const;
};

// Rolls scripted episodes with seeds DeriveSeed(seed, attempt) and keeps the
// successful ones until n_episodes are collected. Throws
// demo-generation-failed once attempts_per_episode * n_episodes rollouts
// have been spent.
DemoCorpus GenerateDemos(const env::EnvConfig& env_config, int n_episodes,
                         std::uint64_t seed, const DemoConfig& config = {});

// JSON-lines: one manifest object, then one Transition object per line
// (with "episode", "seed" and "t" keys added).
void WriteCorpus(std::ostream& out, const DemoCorpus& corpus);
DemoCorpus ReadCorpus(std::istream& in);
void WriteCorpusFile(const std::string& path, const DemoCorpus& corpus);
DemoCorpus ReadCorpusFile(const std::string& path);

}  // namespace tissue_retract::demo

#endif  // TISSUE_RETRACT_DEMO_DEMOGEN_H_
