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

#ifndef TISSUE_RETRACT_TRAINING_TRAINER_H_
#define TISSUE_RETRACT_TRAINING_TRAINER_H_

// Off-policy training loop shared by all agents, and the demo-count
// ablation built on it.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tissue_retract/agents/agent.h"
#include "tissue_retract/demo/demogen.h"
#include "tissue_retract/env/tissue_retract_env.h"
#include "tissue_retract/eval/eval.h"

namespace tissue_retract::training {

struct TrainConfig {
  int episodes = 5000;
  int updates_per_episode = 10;
  std::size_t buffer_capacity = 50000;
  int her_k = 4;
  // Relabel demonstration samples as well.
  bool demo_her = true;
  // Periodic greedy evaluation; 0 disables it.
  int eval_interval = 500;
  int eval_episodes = 20;
  std::uint64_t seed = 1;

  void Validate() const;
};

nlohmann::json TrainConfigToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(const nlohmann::json& j);

struct LogRow {
  int episode = 0;  // 1-based
  long env_steps = 0;
  int length = 0;
  bool success = false;
  // Means over the updates run after this episode.
  agents::UpdateStats stats;
  std::optional<double> eval_success_rate;
};

std::string LogHeader();
std::string FormatLogRow(const LogRow& row);

struct TrainResult {
  agents::Agent agent;
  std::vector<LogRow> log;
  // Greedy success rate after the final episode (eval_episodes episodes).
  std::optional<double> final_eval_rate;
};

using ProgressFn = std::function<void(const LogRow&)>;

// Trains one agent. `demos` is required by every algorithm except DDPG and
// ignored by DDPG; its absence throws configuration-error.
TrainResult Train(const env::EnvConfig& env_config,
                  const agents::AgentConfig& agent_config,
                  const TrainConfig& train_config,
                  const demo::DemoCorpus* demos,
                  const ProgressFn& progress = {});

struct AblationCell {
  std::string algorithm;
  int demo_count = 0;
  eval::EvalReport report;
};

struct AblationConfig {
  std::vector<agents::Algorithm> algorithms;
  std::vector<int> demo_counts{25, 50, 100};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int eval_episodes = 50;
};

// Trains and evaluates every (algorithm, demo count) cell over the seeds.
// Smaller corpora are prefixes of `corpus`; a count larger than the corpus
// throws configuration-error.
std::vector<AblationCell> RunAblation(const env::EnvConfig& env_config,
                                      const agents::AgentConfig& agent_base,
                                      const TrainConfig& train_base,
                                      const demo::DemoCorpus& corpus,
                                      const AblationConfig& ablation,
                                      const ProgressFn& progress = {});

}  // namespace tissue_retract::training

#endif  // TISSUE_RETRACT_TRAINING_TRAINER_H_
