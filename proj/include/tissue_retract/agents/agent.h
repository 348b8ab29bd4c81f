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

#ifndef TISSUE_RETRACT_AGENTS_AGENT_H_
#define TISSUE_RETRACT_AGENTS_AGENT_H_

// Off-policy actor-critic learners sharing one substrate:
//   DDPG    - critic TD loss, actor maximizes Q.
//   SQIL    - demo rewards forced to 0, agent rewards to -1, then DDPG.
//   DDPGBC  - DDPG plus a Q-filtered behavior cloning loss on demo samples.
//   CoL     - BC (+TD) pretraining, then joint BC + actor-Q loss.
//   DEX     - rewards augmented by a behavior-gap bonus against a cloned
//             expert, twin critics with a min bootstrap.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tissue_retract/common/types.h"
#include "tissue_retract/env/policy.h"
#include "tissue_retract/env/tissue_retract_env.h"
#include "tissue_retract/nn/mlp.h"
#include "tissue_retract/replay/replay_buffer.h"

namespace tissue_retract::agents {

enum class Algorithm { kDdpg, kSqil, kDdpgBc, kCol, kDex };

std::string AlgorithmName(Algorithm algorithm);  // "ddpg", "sqil", ...
Algorithm ParseAlgorithm(const std::string& name);
bool UsesDemonstrations(Algorithm algorithm);

struct AgentConfig {
  Algorithm algorithm = Algorithm::kDdpg;
  double gamma = 0.99;
  double lr = 1e-3;
  int batch = 128;
  // Hidden widths; empty selects the per-algorithm default (3x128, DEX 4x256).
  std::vector<int> hidden;
  double tau = 0.005;
  double exploration_noise_sigma = 0.1;
  // Probability of replacing an exploratory action by a uniform random one.
  double random_action_prob = 0.0;
  double demo_fraction = 0.25;
  double sqil_demo_fraction = 0.5;
  double bc_weight = 1.0;        // lambda_BC
  double actor_q_weight = 1.0;   // lambda_A
  double action_l2 = 1.0;        // scaled with lambda_A
  bool q_filter = true;          // DDPGBC
  int col_pretrain_steps = 2000;
  double dex_guidance_weight = 0.1;
  int dex_expert_steps = 2000;
  bool twin_critics = true;      // DEX
  bool clip_target = true;       // y clipped to [-1/(1-gamma), bonus/(1-gamma)]
  double final_layer_scale = 1e-3;
  std::uint64_t seed = 1;

  std::vector<int> HiddenDims() const;
  void Validate() const;
};

nlohmann::json AgentConfigToJson(const AgentConfig& config);
AgentConfig AgentConfigFromJson(const nlohmann::json& j);

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double bc_loss = 0.0;
  double q_filter_pass_rate = 0.0;
  double guidance_reward_mean = 0.0;
};

// Raw (unnormalized) training batch, one column per sample.
struct Batch {
  nn::Matrix obs;       // kObsDim x B
  nn::Matrix actions;   // kActDim x B
  nn::Vector rewards;   // B
  nn::Matrix next_obs;  // kObsDim x B
  nn::Vector done;      // B, 1.0 for terminal
  std::vector<char> is_demo;

  int size() const { return static_cast<int>(rewards.size()); }
  int DemoCount() const;
};

Batch MakeBatch(const std::vector<replay::Sample>& samples);
Batch Concat(const Batch& a, const Batch& b);

// Loss composition for one actor-critic update.
struct UpdateTerms {
  double actor_q_weight = 1.0;
  double bc_weight = 0.0;
  bool q_filter = false;
  double guidance_weight = 0.0;
  bool twin = false;
  bool update_actor = true;
};

enum class ColPhase { kPretrain, kJoint };

class Agent {
 public:
  explicit Agent(const AgentConfig& config);

  env::Action Act(const env::Observation& obs, bool explore);
  // Deterministic actions for a batch of raw observations.
  nn::Matrix PolicyActions(const nn::Matrix& raw_obs) const;
  nn::Matrix QValues(const nn::Matrix& raw_obs, const nn::Matrix& actions,
                     int critic = 0) const;

  UpdateStats DdpgUpdate(const Batch& batch);
  UpdateStats SqilUpdate(const Batch& demo_batch, const Batch& agent_batch);
  UpdateStats DdpgBcUpdate(const Batch& mixed_batch);
  UpdateStats ColUpdate(const Batch& batch, ColPhase phase);
  UpdateStats DexUpdate(const Batch& mixed_batch);
  // Shared core; throws training-diverged on a non-finite loss.
  UpdateStats Update(const Batch& batch, const UpdateTerms& terms);
  // Gradient of the actor loss
  //   lambda_A (-mean Q(s, mu(s)) + action_l2 mean |mu(s)|^2)
  //   + lambda_BC sum_demo |mu(s) - a|^2 / n_demo
  // with respect to the actor parameters, using the current critic. Fills
  // the actor-side fields of `stats` when given.
  nn::Gradients ActorGradients(const Batch& batch, const UpdateTerms& terms,
                               UpdateStats* stats = nullptr) const;

  // Bootstrap targets y = r + gamma (1 - done) Q'(s', mu'(s')) for `rewards`
  // (min over both target critics when `twin`), before clipping.
  nn::Vector BootstrapTargets(const Batch& batch, const nn::Vector& rewards,
                              bool twin) const;
  // r + w exp(-|mu(s) - mu_E(s)|^2); requires a fitted expert proxy.
  nn::Vector GuidedRewards(const Batch& batch, double weight) const;

  // Fits the DEX expert proxy to demonstration (obs, action) pairs by
  // behavior cloning; returns the final mean squared error.
  double FitExpertProxy(replay::ReplayBuffer& demos, int steps);
  bool has_expert() const { return expert_.has_value(); }

  void ObserveEpisode(const replay::Episode& episode);  // normalizer stats

  const AgentConfig& config() const { return config_; }
  const nn::Mlp& actor() const { return actor_; }
  const nn::Mlp& critic(int i = 0) const { return critics_[i]; }
  const nn::Mlp& target_actor() const { return target_actor_; }
  const nn::Mlp& target_critic(int i = 0) const { return target_critics_[i]; }
  nn::Mlp& mutable_actor() { return actor_; }
  nn::Mlp& mutable_critic(int i = 0) { return critics_[i]; }
  nn::Mlp& mutable_target_actor() { return target_actor_; }
  nn::Mlp& mutable_target_critic(int i = 0) { return target_critics_[i]; }
  nn::Mlp& mutable_expert() { return *expert_; }
  void set_expert(nn::Mlp expert) { expert_ = std::move(expert); }
  const nn::Normalizer& normalizer() const { return normalizer_; }
  nn::Normalizer& mutable_normalizer() { return normalizer_; }
  int num_critics() const { return twin_ ? 2 : 1; }
  std::int64_t updates() const { return updates_; }
  Rng& rng() { return rng_; }

  nlohmann::json ToJson() const;
  static Agent FromJson(const nlohmann::json& j);

 private:
  nn::Matrix CriticInput(const nn::Matrix& norm_obs,
                         const nn::Matrix& actions) const;

  AgentConfig config_;
  bool twin_ = false;
  nn::Mlp actor_;
  nn::Mlp target_actor_;
  std::array<nn::Mlp, 2> critics_;
  std::array<nn::Mlp, 2> target_critics_;
  std::optional<nn::Mlp> expert_;
  nn::Adam actor_opt_;
  std::array<nn::Adam, 2> critic_opt_;
  nn::Normalizer normalizer_;
  Rng rng_;
  std::int64_t updates_ = 0;
};

// Exploration-free adaptor for evaluation.
class AgentPolicy : public env::Policy {
 public:
  explicit AgentPolicy(Agent& agent, bool explore = false)
      : agent_(agent), explore_(explore) {}
  env::Action Act(const env::Observation& obs) override {
    return agent_.Act(obs, explore_);
  }

 private:
  Agent& agent_;
  bool explore_;
};

// Checkpoint file: {"manifest": {...}, "agent": {...}}.
void WriteCheckpoint(const std::string& path, const Agent& agent,
                     const nlohmann::json& manifest);
struct LoadedCheckpoint {
  nlohmann::json manifest;
  std::optional<Agent> agent;  // empty for the scripted pseudo-checkpoint
  bool scripted = false;
};
// Throws checkpoint-incompatible when the stored networks do not match the
// environment's observation/action dims.
LoadedCheckpoint ReadCheckpoint(const std::string& path);

}  // namespace tissue_retract::agents

#endif  // TISSUE_RETRACT_AGENTS_AGENT_H_
