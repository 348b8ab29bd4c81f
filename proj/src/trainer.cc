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

#include "tissue_retract/training/trainer.h"

#include <cmath>
#include <cstdio>

#include "tissue_retract/common/error.h"
#include "tissue_retract/replay/replay_buffer.h"

namespace tissue_retract::training {

using agents::Agent;
using agents::Algorithm;
using agents::Batch;
using agents::UpdateStats;

void TrainConfig::Validate() const {
  Require(episodes >= 1, ErrorCode::kConfigurationError,
          "episodes must be at least 1");
  Require(updates_per_episode >= 0 && her_k >= 0 && eval_interval >= 0,
          ErrorCode::kConfigurationError, "negative training count");
  Require(eval_episodes >= 1, ErrorCode::kConfigurationError,
          "eval_episodes must be at least 1");
  Require(buffer_capacity >= 1, ErrorCode::kConfigurationError,
          "buffer capacity must be positive");
}

nlohmann::json TrainConfigToJson(const TrainConfig& c) {
  return {{"episodes", c.episodes},
          {"updates_per_episode", c.updates_per_episode},
          {"buffer_capacity", c.buffer_capacity},
          {"her_k", c.her_k},
          {"demo_her", c.demo_her},
          {"eval_interval", c.eval_interval},
          {"eval_episodes", c.eval_episodes},
          {"seed", c.seed}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  TrainConfig c;
  c.episodes = j.at("episodes").get<int>();
  c.updates_per_episode = j.at("updates_per_episode").get<int>();
  c.buffer_capacity = j.at("buffer_capacity").get<std::size_t>();
  c.her_k = j.at("her_k").get<int>();
  c.demo_her = j.at("demo_her").get<bool>();
  c.eval_interval = j.at("eval_interval").get<int>();
  c.eval_episodes = j.at("eval_episodes").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::string LogHeader() {
  return "episode,env_steps,length,success,critic_loss,actor_loss,bc_loss,"
         "q_filter_pass_rate,guidance_reward_mean,eval_success_rate";
}

std::string FormatLogRow(const LogRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%ld,%d,%d,%.6g,%.6g,%.6g,%.6g,%.6g,",
                r.episode, r.env_steps, r.length, r.success ? 1 : 0,
                r.stats.critic_loss, r.stats.actor_loss, r.stats.bc_loss,
                r.stats.q_filter_pass_rate, r.stats.guidance_reward_mean);
  std::string out = buf;
  if (r.eval_success_rate) {
    std::snprintf(buf, sizeof(buf), "%.4f", *r.eval_success_rate);
    out += buf;
  }
  return out;
}

namespace {

// Seed streams derived from the run seed.
enum Stream : std::uint64_t {
  kEnvStream = 1,
  kAgentBufferStream = 2,
  kDemoBufferStream = 3,
  kEvalStream = 4,
};

void Accumulate(UpdateStats& sum, const UpdateStats& s) {
  sum.critic_loss += s.critic_loss;
  sum.actor_loss += s.actor_loss;
  sum.bc_loss += s.bc_loss;
  sum.q_filter_pass_rate += s.q_filter_pass_rate;
  sum.guidance_reward_mean += s.guidance_reward_mean;
}

UpdateStats Scaled(UpdateStats s, int n) {
  if (n == 0) return s;
  s.critic_loss /= n;
  s.actor_loss /= n;
  s.bc_loss /= n;
  s.q_filter_pass_rate /= n;
  s.guidance_reward_mean /= n;
  return s;
}

class Learner {
 public:
  Learner(const env::EnvConfig& env_config, Agent& agent,
          const TrainConfig& config, const demo::DemoCorpus* demos)
      : agent_(agent),
        config_(config),
        agent_buffer_(config.buffer_capacity,
                      DeriveSeed(config.seed, kAgentBufferStream)),
        demo_buffer_(config.buffer_capacity,
                     DeriveSeed(config.seed, kDemoBufferStream)),
        agent_her_{config.her_k},
        demo_her_{config.demo_her ? config.her_k : 0} {
    const double tol = env_config.task.success_tolerance;
    reward_fn_ = [tol](const Vec3& achieved, const Vec3& desired) {
      return env::ComputeReward(achieved, desired, tol);
    };
    if (agents::UsesDemonstrations(agent_.config().algorithm)) {
      Require(demos != nullptr && !demos->episodes.empty(),
              ErrorCode::kConfigurationError,
              agents::AlgorithmName(agent_.config().algorithm) +
                  " needs a demonstration corpus");
      for (const demo::DemoEpisode& ep : demos->episodes) {
        agent_.ObserveEpisode(ep.transitions);
        demo_buffer_.InsertEpisode(ep.transitions);
      }
    }
  }

  void Prepare() {
    const agents::AgentConfig& c = agent_.config();
    if (c.algorithm == Algorithm::kCol) {
      for (int i = 0; i < c.col_pretrain_steps; ++i) {
        agent_.ColUpdate(DemoBatch(c.batch, demo_her_), agents::ColPhase::kPretrain);
      }
    } else if (c.algorithm == Algorithm::kDex) {
      agent_.FitExpertProxy(demo_buffer_, c.dex_expert_steps);
    }
  }

  void AddEpisode(const replay::Episode& episode) {
    agent_.ObserveEpisode(episode);
    agent_buffer_.InsertEpisode(episode);
  }

  UpdateStats RunUpdate() {
    const agents::AgentConfig& c = agent_.config();
    switch (c.algorithm) {
      case Algorithm::kDdpg:
        return agent_.DdpgUpdate(agents::MakeBatch(
            replay::SampleHer(agent_buffer_, c.batch, agent_her_, reward_fn_)));
      case Algorithm::kSqil: {
        // Environment rewards are overwritten, so goals stay as collected.
        const int n_demo = static_cast<int>(
            std::ceil(c.sqil_demo_fraction * c.batch));
        const Batch demo = DemoBatch(n_demo, {0});
        const Batch agent = agents::MakeBatch(replay::SampleHer(
            agent_buffer_, c.batch - n_demo, {0}, reward_fn_));
        return agent_.SqilUpdate(demo, agent);
      }
      case Algorithm::kDdpgBc:
        return agent_.DdpgBcUpdate(MixedBatch());
      case Algorithm::kCol:
        return agent_.ColUpdate(MixedBatch(), agents::ColPhase::kJoint);
      case Algorithm::kDex:
        return agent_.DexUpdate(MixedBatch());
    }
    return {};
  }

 private:
  Batch DemoBatch(int n, const replay::HerConfig& her) {
    return agents::MakeBatch(replay::SampleHer(demo_buffer_, n, her, reward_fn_,
                                               replay::Provenance::kDemo));
  }

  Batch MixedBatch() {
    const agents::AgentConfig& c = agent_.config();
    return agents::MakeBatch(replay::SampleMixed(agent_buffer_, demo_buffer_,
                                                 c.batch, c.demo_fraction,
                                                 agent_her_, demo_her_,
                                                 reward_fn_));
  }

  Agent& agent_;
  const TrainConfig& config_;
  replay::ReplayBuffer agent_buffer_;
  replay::ReplayBuffer demo_buffer_;
  replay::HerConfig agent_her_;
  replay::HerConfig demo_her_;
  replay::RewardFn reward_fn_;
};

double GreedyRate(const env::EnvConfig& env_config, Agent& agent,
                  int episodes, std::uint64_t seed) {
  env::TissueRetractEnv env(env_config);
  agents::AgentPolicy policy(agent, false);
  return eval::RunEval(env, policy, episodes, seed).success_rate;
}

}  // namespace

TrainResult Train(const env::EnvConfig& env_config,
                  const agents::AgentConfig& agent_config,
                  const TrainConfig& train_config,
                  const demo::DemoCorpus* demos, const ProgressFn& progress) {
  train_config.Validate();
  TrainResult result{Agent(agent_config), {}, std::nullopt};
  Agent& agent = result.agent;
  Learner learner(env_config, agent, train_config, demos);
  learner.Prepare();

  env::TissueRetractEnv env(env_config);
  agents::AgentPolicy explorer(agent, true);
  const std::uint64_t env_seed = DeriveSeed(train_config.seed, kEnvStream);
  const std::uint64_t eval_seed = DeriveSeed(train_config.seed, kEvalStream);
  long env_steps = 0;
  for (int ep = 1; ep <= train_config.episodes; ++ep) {
    replay::Episode episode =
        env::Rollout(env, explorer, DeriveSeed(env_seed, ep));
    LogRow row;
    row.episode = ep;
    row.length = static_cast<int>(episode.size());
    row.success = episode.back().info.success;
    env_steps += row.length;
    row.env_steps = env_steps;
    learner.AddEpisode(std::move(episode));

    UpdateStats sum;
    for (int u = 0; u < train_config.updates_per_episode; ++u) {
      Accumulate(sum, learner.RunUpdate());
    }
    row.stats = Scaled(sum, train_config.updates_per_episode);
    if (train_config.eval_interval > 0 && ep % train_config.eval_interval == 0) {
      row.eval_success_rate =
          GreedyRate(env_config, agent, train_config.eval_episodes, eval_seed);
    }
    if (ep == train_config.episodes) {
      result.final_eval_rate =
          row.eval_success_rate
              ? row.eval_success_rate
              : GreedyRate(env_config, agent, train_config.eval_episodes,
                           eval_seed);
    }
    if (progress) progress(row);
    result.log.push_back(row);
  }
  return result;
}

std::vector<AblationCell> RunAblation(const env::EnvConfig& env_config,
                                      const agents::AgentConfig& agent_base,
                                      const TrainConfig& train_base,
                                      const demo::DemoCorpus& corpus,
                                      const AblationConfig& ablation,
                                      const ProgressFn& progress) {
  Require(!ablation.algorithms.empty() && !ablation.seeds.empty(),
          ErrorCode::kConfigurationError,
          "ablation needs algorithms and seeds");
  for (int count : ablation.demo_counts) {
    Require(count >= 1 && count <= static_cast<int>(corpus.episodes.size()),
            ErrorCode::kConfigurationError,
            "no corpus with " + std::to_string(count) +
                " demonstrations (have " +
                std::to_string(corpus.episodes.size()) + ")");
  }
  std::vector<AblationCell> cells;
  for (Algorithm algorithm : ablation.algorithms) {
    for (int count : ablation.demo_counts) {
      const demo::DemoCorpus prefix = corpus.Prefix(count);
      std::vector<eval::EvalRun> runs;
      for (std::uint64_t seed : ablation.seeds) {
        agents::AgentConfig agent_config = agent_base;
        agent_config.algorithm = algorithm;
        agent_config.seed = seed;
        TrainConfig train_config = train_base;
        train_config.seed = seed;
        TrainResult trained =
            Train(env_config, agent_config, train_config, &prefix, progress);
        env::TissueRetractEnv env(env_config);
        agents::AgentPolicy policy(trained.agent, false);
        runs.push_back(eval::RunEval(env, policy, ablation.eval_episodes, seed));
      }
      cells.push_back({agents::AlgorithmName(algorithm), count,
                       eval::MakeReport(env_config.task.task_id,
                                        agents::AlgorithmName(algorithm), count,
                                        ablation.seeds, runs)});
    }
  }
  return cells;
}

}  // namespace tissue_retract::training
