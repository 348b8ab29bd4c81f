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

#include "tissue_retract/replay/replay_buffer.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tissue_retract/common/error.h"

namespace tissue_retract::replay {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  Require(capacity > 0, ErrorCode::kInvalidArgument,
          "replay capacity must be positive");
}

void ReplayBuffer::InsertEpisode(Episode episode) {
  Require(!episode.empty(), ErrorCode::kInvalidArgument,
          "cannot insert an empty episode");
  Require(episode.size() <= capacity_, ErrorCode::kInvalidArgument,
          "episode longer than replay capacity");
  size_ += episode.size();
  episodes_.push_back(std::move(episode));
  while (size_ > capacity_) {
    size_ -= episodes_.front().size();
    episodes_.pop_front();
    ++first_id_;
  }
  RebuildOffsets();
}

void ReplayBuffer::RebuildOffsets() {
  ends_.resize(episodes_.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < episodes_.size(); ++i) {
    total += episodes_[i].size();
    ends_[i] = total;
  }
}

std::pair<std::size_t, int> ReplayBuffer::SampleIndex() {
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  const std::size_t flat = pick(rng_);
  const auto it = std::upper_bound(ends_.begin(), ends_.end(), flat);
  const std::size_t episode = static_cast<std::size_t>(it - ends_.begin());
  const std::size_t start = episode == 0 ? 0 : ends_[episode - 1];
  return {episode, static_cast<int>(flat - start)};
}

std::vector<Sample> SampleHer(ReplayBuffer& buffer, int batch,
                              const HerConfig& her, const RewardFn& reward_fn,
                              Provenance provenance) {
  Require(!buffer.empty(), ErrorCode::kInvalidState,
          "cannot sample from an empty replay buffer");
  Require(her.k_relabel >= 0, ErrorCode::kInvalidArgument,
          "k_relabel must be non-negative");
  const double relabel_p =
      static_cast<double>(her.k_relabel) / (her.k_relabel + 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<Sample> out;
  out.reserve(batch);
  for (int i = 0; i < batch; ++i) {
    const auto [episode_index, step] = buffer.SampleIndex();
    const Episode& episode = buffer.episodes()[episode_index];
    Sample s;
    s.transition = episode[step];
    s.provenance = provenance;
    s.episode_id = buffer.EpisodeId(episode_index);
    s.step = step;
    if (relabel_p > 0.0 && coin(buffer.rng()) < relabel_p) {
      std::uniform_int_distribution<int> later(
          step, static_cast<int>(episode.size()) - 1);
      s.goal_step = later(buffer.rng());
      const Vec3 goal = episode[s.goal_step].next_obs.achieved_goal;
      s.transition.obs.desired_goal = goal;
      s.transition.next_obs.desired_goal = goal;
      s.transition.reward =
          reward_fn(s.transition.next_obs.achieved_goal, goal);
      s.relabeled = true;
    }
    s.transition.done = s.transition.reward == 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

int DemoCount(int batch, double demo_fraction) {
  return static_cast<int>(std::ceil(demo_fraction * batch - 1e-9));
}

std::vector<Sample> SampleMixed(ReplayBuffer& agent_buffer,
                                ReplayBuffer& demo_buffer, int batch,
                                double demo_fraction, const HerConfig& agent_her,
                                const HerConfig& demo_her,
                                const RewardFn& reward_fn) {
  Require(demo_fraction >= 0.0 && demo_fraction <= 1.0,
          ErrorCode::kInvalidArgument, "demo_fraction must lie in [0, 1]");
  const int n_demo = DemoCount(batch, demo_fraction);
  Require(n_demo == 0 || !demo_buffer.empty(), ErrorCode::kInvalidState,
          "demo samples requested from an empty demonstration buffer");
  std::vector<Sample> out;
  out.reserve(batch);
  if (n_demo > 0) {
    out = SampleHer(demo_buffer, n_demo, demo_her, reward_fn, Provenance::kDemo);
  }
  if (batch - n_demo > 0) {
    std::vector<Sample> agent =
        SampleHer(agent_buffer, batch - n_demo, agent_her, reward_fn);
    out.insert(out.end(), std::make_move_iterator(agent.begin()),
               std::make_move_iterator(agent.end()));
  }
  return out;
}

}  // namespace tissue_retract::replay
