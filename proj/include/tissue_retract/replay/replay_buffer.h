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

#ifndef TISSUE_RETRACT_REPLAY_REPLAY_BUFFER_H_
#define TISSUE_RETRACT_REPLAY_REPLAY_BUFFER_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "tissue_retract/common/types.h"
#include "tissue_retract/env/tissue_retract_env.h"

namespace tissue_retract::replay {

using Episode = std::vector<env::Transition>;

// reward(achieved_goal, desired_goal)
using RewardFn = std::function<double(const Vec3&, const Vec3&)>;

enum class Provenance { kAgent, kDemo };

struct HerConfig {
  // Relabel with probability k / (k + 1); 0 disables relabeling.
  int k_relabel = 4;
};

struct Sample {
  env::Transition transition;
  Provenance provenance = Provenance::kAgent;
  bool relabeled = false;
  // Position of the source transition and, when relabeled, of the
  // transition whose outcome supplied the new goal (goal_step >= step).
  long episode_id = 0;
  int step = 0;
  int goal_step = -1;
};

// Episode-granular FIFO store whose capacity is counted in transitions.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  // Throws invalid-argument for an empty episode or one longer than the
  // capacity. Evicts oldest episodes until the total fits.
  void InsertEpisode(Episode episode);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t num_episodes() const { return episodes_.size(); }
  bool empty() const { return size_ == 0; }
  const std::deque<Episode>& episodes() const { return episodes_; }
  // Monotone id of the episode stored at `index` (counts evicted ones).
  long EpisodeId(std::size_t index) const { return first_id_ + index; }

  // Uniform over stored transitions; returns (episode index, step).
  std::pair<std::size_t, int> SampleIndex();
  Rng& rng() { return rng_; }

 private:
  void RebuildOffsets();

  std::size_t capacity_;
  std::size_t size_ = 0;
  long first_id_ = 0;
  std::deque<Episode> episodes_;
  std::vector<std::size_t> ends_;  // cumulative transition counts
  Rng rng_;
};

// Samples `batch` transitions uniformly. Each is relabeled with probability
// k/(k+1): desired_goal (in obs and next_obs) becomes the achieved goal
// reached after a uniformly chosen step t' in [t, T-1] of the same episode,
// reward becomes reward_fn(achieved, new goal). For every sample, done is
// recomputed as (reward == 0) so horizon cut-offs are not treated as
// terminal. Throws invalid-state on an empty buffer.
std::vector<Sample> SampleHer(ReplayBuffer& buffer, int batch,
                              const HerConfig& her, const RewardFn& reward_fn,
                              Provenance provenance = Provenance::kAgent);

// ceil(demo_fraction * batch) samples from the demo buffer, the rest from
// the agent buffer, each side relabeled with its own HerConfig. Throws
// invalid-state when demo samples are requested from an empty buffer.
std::vector<Sample> SampleMixed(ReplayBuffer& agent_buffer,
                                ReplayBuffer& demo_buffer, int batch,
                                double demo_fraction, const HerConfig& agent_her,
                                const HerConfig& demo_her,
                                const RewardFn& reward_fn);

int DemoCount(int batch, double demo_fraction);

}  // namespace tissue_retract::replay

#endif  // TISSUE_RETRACT_REPLAY_REPLAY_BUFFER_H_
