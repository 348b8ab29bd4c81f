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

#include "tissue_retract/demo/demogen.h"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "tissue_retract/common/error.h"
#include "tissue_retract/env/json_io.h"

namespace tissue_retract::demo {

using nlohmann::json;

CheckpointPlan MakePlan(const env::Observation& obs, const DemoConfig& config) {
  CheckpointPlan plan;
  plan.p1_approach = obs.anchor_position + Vec3(0.0, 0.0, config.clearance);
  plan.p2_grasp = obs.anchor_position;
  plan.p3_retract = obs.desired_goal;
  plan.p4_hold = plan.p3_retract;
  plan.hold_steps = config.hold_steps;
  return plan;
}

namespace {

const Vec3& Checkpoint(const CheckpointPlan& plan, Phase phase) {
  switch (phase) {
    case Phase::kApproach: return plan.p1_approach;
    case Phase::kGrasp: return plan.p2_grasp;
    case Phase::kRetract: return plan.p3_retract;
    case Phase::kHold: return plan.p4_hold;
  }
  return plan.p4_hold;
}

double GripFor(Phase phase) {
  return phase == Phase::kApproach || phase == Phase::kGrasp ? 1.0 : -1.0;
}

}  // namespace

env::Action NextAction(const env::Observation& obs, const CheckpointPlan& plan,
                       PhaseState& state, const DemoConfig& config,
                       double max_step) {
  const bool tracks_anchor = state.phase == Phase::kRetract ||
                             state.phase == Phase::kHold;
  const Vec3& position = tracks_anchor ? obs.anchor_position : obs.ee_position;
  const Vec3 error = Checkpoint(plan, state.phase) - position;

  env::Action action;
  if (state.phase != Phase::kHold && error.norm() <= config.advance_tolerance) {
    state.phase = static_cast<Phase>(static_cast<int>(state.phase) + 1);
    action.grip_cmd = GripFor(state.phase);
    return action;
  }
  if (state.phase == Phase::kHold) ++state.held_steps;
  action.delta = (error / max_step).cwiseMax(-1.0).cwiseMin(1.0);
  action.grip_cmd = GripFor(state.phase);
  return action;
}

void ScriptedPolicy::BeginEpisode(const env::Observation& first) {
  plan_ = MakePlan(first, config_);
  state_ = {};
}

env::Action ScriptedPolicy::Act(const env::Observation& obs) {
  // Lost the tissue mid-pull: plan a fresh approach to where the anchor is now.
  if ((state_.phase == Phase::kRetract || state_.phase == Phase::kHold) &&
      obs.grasp_flag == 0.0) {
    plan_ = MakePlan(obs, config_);
    state_ = {};
  }
  return NextAction(obs, plan_, state_, config_, max_step_);
}

double DemoCorpus::SuccessFraction() const {
  return manifest.attempts > 0
             ? static_cast<double>(episodes.size()) / manifest.attempts
             : 0.0;
}

double DemoCorpus::MeanEpisodeLength() const {
  if (episodes.empty()) return 0.0;
  double total = 0.0;
  for (const DemoEpisode& ep : episodes) total += ep.transitions.size();
  return total / episodes.size();
}

DemoCorpus DemoCorpus::Prefix(int n) const {
  Require(n >= 0 && n <= static_cast<int>(episodes.size()),
          ErrorCode::kInvalidArgument, "prefix longer than corpus");
  DemoCorpus out;
  out.manifest = manifest;
  out.episodes.assign(episodes.begin(), episodes.begin() + n);
  out.manifest.episodes = n;
  out.manifest.transitions = 0;
  for (const DemoEpisode& ep : out.episodes) {
    out.manifest.transitions += static_cast<int>(ep.transitions.size());
  }
  // Rollouts spent up to and including the last kept episode.
  if (n == 0) {
    out.manifest.attempts = 0;
  } else {
    for (int attempt = 0; attempt < manifest.attempts; ++attempt) {
      if (DeriveSeed(manifest.seed, attempt) == out.episodes.back().seed) {
        out.manifest.attempts = attempt + 1;
        break;
      }
    }
  }
  return out;
}

DemoCorpus GenerateDemos(const env::EnvConfig& env_config, int n_episodes,
                         std::uint64_t seed, const DemoConfig& config) {
  Require(n_episodes >= 1, ErrorCode::kInvalidArgument,
          "n_episodes must be >= 1");
  env::TissueRetractEnv environment(env_config);
  ScriptedPolicy policy(config, env_config.max_step);

  DemoCorpus corpus;
  corpus.manifest.task = env_config.task.task_id;
  corpus.manifest.seed = seed;
  corpus.manifest.config_hash = env::ConfigHash(env_config);
  const int budget = config.attempts_per_episode * n_episodes;
  int attempt = 0;
  while (static_cast<int>(corpus.episodes.size()) < n_episodes) {
    if (attempt >= budget) {
      std::ostringstream msg;
      msg << "only " << corpus.episodes.size() << " of " << attempt
          << " scripted rollouts succeeded (success fraction "
          << static_cast<double>(corpus.episodes.size()) / attempt << ")";
      throw Error(ErrorCode::kDemoGenerationFailed, msg.str());
    }
    const std::uint64_t episode_seed = DeriveSeed(seed, attempt++);
    std::vector<env::Transition> episode =
        env::Rollout(environment, policy, episode_seed);
    if (!episode.back().info.success) continue;
    corpus.manifest.transitions += static_cast<int>(episode.size());
    corpus.episodes.push_back({episode_seed, std::move(episode)});
  }
  corpus.manifest.attempts = attempt;
  corpus.manifest.episodes = n_episodes;
  return corpus;
}

void WriteCorpus(std::ostream& out, const DemoCorpus& corpus) {
  const CorpusManifest& m = corpus.manifest;
  json manifest = {{"type", "demo_corpus"},
                   {"format_version", 1},
                   {"task", std::string(env::TaskName(m.task))},
                   {"seed", m.seed},
                   {"episodes", m.episodes},
                   {"attempts", m.attempts},
                   {"transitions", m.transitions},
                   {"config_hash", m.config_hash}};
  out << manifest.dump() << '\n';
  for (size_t e = 0; e < corpus.episodes.size(); ++e) {
    const DemoEpisode& ep = corpus.episodes[e];
    for (size_t t = 0; t < ep.transitions.size(); ++t) {
      json line = ep.transitions[t];
      line["episode"] = e;
      line["seed"] = ep.seed;
      line["t"] = t;
      out << line.dump() << '\n';
    }
  }
}

DemoCorpus ReadCorpus(std::istream& in) {
  DemoCorpus corpus;
  std::string text;
  int line_number = 0;
  bool have_manifest = false;
  while (std::getline(in, text)) {
    ++line_number;
    if (text.empty()) continue;
    json line;
    try {
      line = json::parse(text);
      if (!have_manifest) {
        Require(line.value("type", "") == "demo_corpus",
                ErrorCode::kParseError, "first line is not a corpus manifest");
        CorpusManifest& m = corpus.manifest;
        m.task = env::ParseTaskId(line.at("task").get<std::string>());
        m.seed = line.at("seed").get<std::uint64_t>();
        m.episodes = line.at("episodes").get<int>();
        m.attempts = line.at("attempts").get<int>();
        m.transitions = line.at("transitions").get<int>();
        m.config_hash = line.at("config_hash").get<std::string>();
        have_manifest = true;
        continue;
      }
      const size_t episode = line.at("episode").get<size_t>();
      Require(episode == corpus.episodes.size() ||
                  episode + 1 == corpus.episodes.size(),
              ErrorCode::kParseError, "episode indices out of order");
      if (episode == corpus.episodes.size()) {
        corpus.episodes.push_back({line.at("seed").get<std::uint64_t>(), {}});
      }
      corpus.episodes.back().transitions.push_back(
          line.get<env::Transition>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_number) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  Require(have_manifest, ErrorCode::kParseError, "corpus has no manifest");
  Require(static_cast<int>(corpus.episodes.size()) == corpus.manifest.episodes,
          ErrorCode::kParseError,
          "corpus truncated: manifest lists " +
              std::to_string(corpus.manifest.episodes) + " episodes, found " +
              std::to_string(corpus.episodes.size()));
  return corpus;
}

void WriteCorpusFile(const std::string& path, const DemoCorpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorCode::kInvalidArgument, "cannot write " + path);
  WriteCorpus(out, corpus);
}

DemoCorpus ReadCorpusFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kConfigurationError,
          "cannot open corpus " + path);
  return ReadCorpus(in);
}

}  // namespace tissue_retract::demo
