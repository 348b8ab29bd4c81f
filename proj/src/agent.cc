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

#include "tissue_retract/agents/agent.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "tissue_retract/common/error.h"

namespace tissue_retract::agents {

using nn::Matrix;
using nn::Vector;

std::string AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kDdpg: return "ddpg";
    case Algorithm::kSqil: return "sqil";
    case Algorithm::kDdpgBc: return "ddpgbc";
    case Algorithm::kCol: return "col";
    case Algorithm::kDex: return "dex";
  }
  return "ddpg";
}

Algorithm ParseAlgorithm(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "ddpg") return Algorithm::kDdpg;
  if (lower == "sqil") return Algorithm::kSqil;
  if (lower == "ddpgbc") return Algorithm::kDdpgBc;
  if (lower == "col") return Algorithm::kCol;
  if (lower == "dex") return Algorithm::kDex;
  throw Error(ErrorCode::kInvalidArgument, "unknown algorithm '" + name + "'");
}

bool UsesDemonstrations(Algorithm algorithm) {
  return algorithm != Algorithm::kDdpg;
}

std::vector<int> AgentConfig::HiddenDims() const {
  if (!hidden.empty()) return hidden;
  if (algorithm == Algorithm::kDex) return {256, 256, 256, 256};
  return {128, 128, 128};
}

void AgentConfig::Validate() const {
  Require(gamma > 0.0 && gamma < 1.0, ErrorCode::kInvalidArgument,
          "gamma must lie in (0, 1)");
  Require(lr > 0.0 && batch >= 1 && tau >= 0.0 && tau <= 1.0,
          ErrorCode::kInvalidArgument, "lr, batch and tau out of range");
  Require(bc_weight >= 0.0 && actor_q_weight >= 0.0 && action_l2 >= 0.0 &&
              dex_guidance_weight >= 0.0 && exploration_noise_sigma >= 0.0,
          ErrorCode::kInvalidArgument, "loss weights must be non-negative");
  Require(demo_fraction >= 0.0 && demo_fraction <= 1.0 &&
              sqil_demo_fraction >= 0.0 && sqil_demo_fraction <= 1.0 &&
              random_action_prob >= 0.0 && random_action_prob <= 1.0,
          ErrorCode::kInvalidArgument, "fractions must lie in [0, 1]");
  Require(col_pretrain_steps >= 0 && dex_expert_steps >= 0,
          ErrorCode::kInvalidArgument, "step counts must be non-negative");
  for (int h : HiddenDims()) {
    Require(h > 0, ErrorCode::kInvalidArgument, "hidden widths must be positive");
  }
}

nlohmann::json AgentConfigToJson(const AgentConfig& c) {
  return {{"algorithm", AlgorithmName(c.algorithm)},
          {"gamma", c.gamma},
          {"lr", c.lr},
          {"batch", c.batch},
          {"hidden", c.HiddenDims()},
          {"tau", c.tau},
          {"exploration_noise_sigma", c.exploration_noise_sigma},
          {"random_action_prob", c.random_action_prob},
          {"demo_fraction", c.demo_fraction},
          {"sqil_demo_fraction", c.sqil_demo_fraction},
          {"bc_weight", c.bc_weight},
          {"actor_q_weight", c.actor_q_weight},
          {"action_l2", c.action_l2},
          {"q_filter", c.q_filter},
          {"col_pretrain_steps", c.col_pretrain_steps},
          {"dex_guidance_weight", c.dex_guidance_weight},
          {"dex_expert_steps", c.dex_expert_steps},
          {"twin_critics", c.twin_critics},
          {"clip_target", c.clip_target},
          {"final_layer_scale", c.final_layer_scale},
          {"seed", c.seed}};
}

AgentConfig AgentConfigFromJson(const nlohmann::json& j) {
  AgentConfig c;
  c.algorithm = ParseAlgorithm(j.at("algorithm").get<std::string>());
  c.gamma = j.at("gamma").get<double>();
  c.lr = j.at("lr").get<double>();
  c.batch = j.at("batch").get<int>();
  c.hidden = j.at("hidden").get<std::vector<int>>();
  c.tau = j.at("tau").get<double>();
  c.exploration_noise_sigma = j.at("exploration_noise_sigma").get<double>();
  c.random_action_prob = j.at("random_action_prob").get<double>();
  c.demo_fraction = j.at("demo_fraction").get<double>();
  c.sqil_demo_fraction = j.at("sqil_demo_fraction").get<double>();
  c.bc_weight = j.at("bc_weight").get<double>();
  c.actor_q_weight = j.at("actor_q_weight").get<double>();
  c.action_l2 = j.at("action_l2").get<double>();
  c.q_filter = j.at("q_filter").get<bool>();
  c.col_pretrain_steps = j.at("col_pretrain_steps").get<int>();
  c.dex_guidance_weight = j.at("dex_guidance_weight").get<double>();
  c.dex_expert_steps = j.at("dex_expert_steps").get<int>();
  c.twin_critics = j.at("twin_critics").get<bool>();
  c.clip_target = j.at("clip_target").get<bool>();
  c.final_layer_scale = j.at("final_layer_scale").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

int Batch::DemoCount() const {
  return static_cast<int>(std::count(is_demo.begin(), is_demo.end(), 1));
}

Batch MakeBatch(const std::vector<replay::Sample>& samples) {
  const int n = static_cast<int>(samples.size());
  Batch b;
  b.obs.resize(env::kObsDim, n);
  b.actions.resize(env::kActDim, n);
  b.rewards.resize(n);
  b.next_obs.resize(env::kObsDim, n);
  b.done.resize(n);
  b.is_demo.resize(n);
  for (int i = 0; i < n; ++i) {
    const env::Transition& tr = samples[i].transition;
    b.obs.col(i) = tr.obs.ToVector();
    b.actions.col(i) = tr.action.ToVector();
    b.rewards[i] = tr.reward;
    b.next_obs.col(i) = tr.next_obs.ToVector();
    b.done[i] = tr.done ? 1.0 : 0.0;
    b.is_demo[i] = samples[i].provenance == replay::Provenance::kDemo ? 1 : 0;
  }
  return b;
}

Batch Concat(const Batch& a, const Batch& b) {
  Batch out;
  out.obs.resize(env::kObsDim, a.size() + b.size());
  out.obs << a.obs, b.obs;
  out.actions.resize(env::kActDim, a.size() + b.size());
  out.actions << a.actions, b.actions;
  out.rewards.resize(a.size() + b.size());
  out.rewards << a.rewards, b.rewards;
  out.next_obs.resize(env::kObsDim, a.size() + b.size());
  out.next_obs << a.next_obs, b.next_obs;
  out.done.resize(a.size() + b.size());
  out.done << a.done, b.done;
  out.is_demo = a.is_demo;
  out.is_demo.insert(out.is_demo.end(), b.is_demo.begin(), b.is_demo.end());
  return out;
}

namespace {

std::vector<int> Chain(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

}  // namespace

Agent::Agent(const AgentConfig& config)
    : config_(config), rng_(DeriveSeed(config.seed, 0xA6E47)) {
  config_.Validate();
  config_.hidden = config_.HiddenDims();
  twin_ = config_.algorithm == Algorithm::kDex && config_.twin_critics;
  const std::vector<int> actor_dims =
      Chain(env::kObsDim, config_.hidden, env::kActDim);
  const std::vector<int> critic_dims =
      Chain(env::kObsDim + env::kActDim, config_.hidden, 1);
  actor_ = nn::Mlp::Initialized(actor_dims, nn::Activation::kRelu,
                                nn::Activation::kTanh, rng_,
                                config_.final_layer_scale);
  for (auto& critic : critics_) {
    critic = nn::Mlp::Initialized(critic_dims, nn::Activation::kRelu,
                                  nn::Activation::kIdentity, rng_);
  }
  target_actor_ = actor_;
  target_critics_ = critics_;
  const nn::AdamConfig adam{config_.lr};
  actor_opt_ = nn::Adam(actor_, adam);
  for (int i = 0; i < 2; ++i) critic_opt_[i] = nn::Adam(critics_[i], adam);
  normalizer_ = nn::Normalizer(env::kObsDim);
}

Matrix Agent::CriticInput(const Matrix& norm_obs, const Matrix& actions) const {
  Matrix x(env::kObsDim + env::kActDim, norm_obs.cols());
  x << norm_obs, actions;
  return x;
}

env::Action Agent::Act(const env::Observation& obs, bool explore) {
  const Matrix x = normalizer_.Normalize(obs.ToVector());
  env::ActVector a = actor_.Forward(x).col(0);
  if (explore) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (config_.random_action_prob > 0.0 &&
        coin(rng_) < config_.random_action_prob) {
      std::uniform_real_distribution<double> uniform(-1.0, 1.0);
      for (int k = 0; k < env::kActDim; ++k) a[k] = uniform(rng_);
    } else {
      std::normal_distribution<double> noise(0.0,
                                             config_.exploration_noise_sigma);
      for (int k = 0; k < env::kActDim; ++k) a[k] += noise(rng_);
    }
  }
  return env::Action::FromVector(a);
}

Matrix Agent::PolicyActions(const Matrix& raw_obs) const {
  return actor_.Forward(normalizer_.Normalize(raw_obs));
}

Matrix Agent::QValues(const Matrix& raw_obs, const Matrix& actions,
                      int critic) const {
  return critics_[critic].Forward(
      CriticInput(normalizer_.Normalize(raw_obs), actions));
}

Vector Agent::BootstrapTargets(const Batch& batch, const Vector& rewards,
                               bool twin) const {
  const Matrix next = normalizer_.Normalize(batch.next_obs);
  const Matrix next_actions = target_actor_.Forward(next);
  const Matrix input = CriticInput(next, next_actions);
  Vector next_q = target_critics_[0].Forward(input).row(0).transpose();
  if (twin) {
    const Vector q2 = target_critics_[1].Forward(input).row(0).transpose();
    next_q = next_q.cwiseMin(q2);
  }
  return rewards.array() +
         config_.gamma * (1.0 - batch.done.array()) * next_q.array();
}

Vector Agent::GuidedRewards(const Batch& batch, double weight) const {
  Require(expert_.has_value(), ErrorCode::kInvalidState,
          "guidance reward needs a fitted expert proxy");
  const Matrix obs = normalizer_.Normalize(batch.obs);
  const Matrix gap = actor_.Forward(obs) - expert_->Forward(obs);
  const Vector gap_sq = gap.colwise().squaredNorm().transpose();
  return batch.rewards.array() + weight * (-gap_sq.array()).exp();
}

nn::Gradients Agent::ActorGradients(const Batch& batch,
                                    const UpdateTerms& terms,
                                    UpdateStats* stats) const {
  const int n = batch.size();
  Require(n > 0, ErrorCode::kInvalidArgument, "empty update batch");
  UpdateStats local;
  UpdateStats& out = stats != nullptr ? *stats : local;
  const Matrix obs = normalizer_.Normalize(batch.obs);
  nn::ForwardCache actor_cache;
  const Matrix pi = actor_.Forward(obs, &actor_cache);
  Matrix grad_pi = Matrix::Zero(env::kActDim, n);

  if (terms.actor_q_weight > 0.0) {
    nn::ForwardCache q_cache;
    const Matrix q = critics_[0].Forward(CriticInput(obs, pi), &q_cache);
    out.actor_loss = -q.mean();
    const Matrix dq = Matrix::Constant(1, n, -terms.actor_q_weight / n);
    const nn::Gradients g = critics_[0].Backward(q_cache, dq, false);
    grad_pi += g.input.bottomRows(env::kActDim);
    grad_pi += (2.0 * terms.actor_q_weight * config_.action_l2 / n) * pi;
  }

  const int n_demo = batch.DemoCount();
  if (terms.bc_weight > 0.0 && n_demo > 0) {
    Vector q_demo, q_pi;
    if (terms.q_filter) {
      q_demo = critics_[0].Forward(CriticInput(obs, batch.actions))
                   .row(0).transpose();
      q_pi = critics_[0].Forward(CriticInput(obs, pi)).row(0).transpose();
    }
    int used = 0;
    double bc = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!batch.is_demo[i]) continue;
      if (terms.q_filter && !(q_demo[i] > q_pi[i])) continue;
      ++used;
      const Vector diff = pi.col(i) - batch.actions.col(i);
      bc += diff.squaredNorm();
      grad_pi.col(i) += (2.0 * terms.bc_weight / n_demo) * diff;
    }
    out.bc_loss = bc / n_demo;
    out.q_filter_pass_rate = static_cast<double>(used) / n_demo;
  }
  Require(std::isfinite(out.actor_loss) && std::isfinite(out.bc_loss),
          ErrorCode::kTrainingDiverged, "non-finite actor loss");
  return actor_.Backward(actor_cache, grad_pi);
}

UpdateStats Agent::Update(const Batch& batch, const UpdateTerms& terms) {
  const int n = batch.size();
  Require(n > 0, ErrorCode::kInvalidArgument, "empty update batch");
  Require(!terms.twin || twin_, ErrorCode::kInvalidState,
          "twin update on a single-critic agent");
  UpdateStats stats;
  const Matrix obs = normalizer_.Normalize(batch.obs);

  Vector rewards = batch.rewards;
  if (terms.guidance_weight > 0.0) {
    rewards = GuidedRewards(batch, terms.guidance_weight);
    stats.guidance_reward_mean = (rewards - batch.rewards).mean();
  }
  Vector targets = BootstrapTargets(batch, rewards, terms.twin);
  if (config_.clip_target) {
    const double horizon_scale = 1.0 / (1.0 - config_.gamma);
    targets = targets.cwiseMax(-horizon_scale)
                  .cwiseMin(terms.guidance_weight * horizon_scale);
  }

  // Critic regression.
  const Matrix critic_in = CriticInput(obs, batch.actions);
  for (int c = 0; c < (terms.twin ? 2 : 1); ++c) {
    nn::ForwardCache cache;
    const Vector q = critics_[c].Forward(critic_in, &cache).row(0).transpose();
    const Vector diff = q - targets;
    const double loss = diff.squaredNorm() / n;
    Require(std::isfinite(loss), ErrorCode::kTrainingDiverged,
            "non-finite critic loss");
    if (c == 0) stats.critic_loss = loss;
    const Matrix grad = (2.0 / n) * diff.transpose();
    critic_opt_[c].Step(critics_[c], critics_[c].Backward(cache, grad));
  }

  if (terms.update_actor) {
    const nn::Gradients grads = ActorGradients(batch, terms, &stats);
    actor_opt_.Step(actor_, grads);
  }

  SoftUpdate(target_actor_, actor_, config_.tau);
  for (int c = 0; c < (twin_ ? 2 : 1); ++c) {
    SoftUpdate(target_critics_[c], critics_[c], config_.tau);
  }
  ++updates_;
  return stats;
}

UpdateStats Agent::DdpgUpdate(const Batch& batch) {
  return Update(batch, {.actor_q_weight = 1.0});
}

UpdateStats Agent::SqilUpdate(const Batch& demo_batch,
                              const Batch& agent_batch) {
  Batch demo = demo_batch;
  demo.rewards.setZero();
  Batch agent = agent_batch;
  agent.rewards.setConstant(-1.0);
  return Update(Concat(demo, agent), {.actor_q_weight = 1.0});
}

UpdateStats Agent::DdpgBcUpdate(const Batch& mixed_batch) {
  return Update(mixed_batch, {.actor_q_weight = 1.0,
                              .bc_weight = config_.bc_weight,
                              .q_filter = config_.q_filter});
}

UpdateStats Agent::ColUpdate(const Batch& batch, ColPhase phase) {
  if (phase == ColPhase::kPretrain) {
    return Update(batch, {.actor_q_weight = 0.0, .bc_weight = config_.bc_weight});
  }
  return Update(batch, {.actor_q_weight = config_.actor_q_weight,
                        .bc_weight = config_.bc_weight});
}

UpdateStats Agent::DexUpdate(const Batch& mixed_batch) {
  return Update(mixed_batch, {.actor_q_weight = 1.0,
                              .guidance_weight = config_.dex_guidance_weight,
                              .twin = twin_});
}

double Agent::FitExpertProxy(replay::ReplayBuffer& demos, int steps) {
  Require(!demos.empty(), ErrorCode::kInvalidState,
          "expert proxy needs demonstrations");
  nn::Mlp expert = nn::Mlp::Initialized(actor_.dims(), nn::Activation::kRelu,
                                        nn::Activation::kTanh, rng_,
                                        config_.final_layer_scale);
  nn::Adam opt(expert, nn::AdamConfig{config_.lr});
  const auto reward_fn = [](const Vec3&, const Vec3&) { return -1.0; };
  double mse = 0.0;
  for (int step = 0; step < steps; ++step) {
    const Batch b = MakeBatch(replay::SampleHer(demos, config_.batch, {0},
                                                reward_fn,
                                                replay::Provenance::kDemo));
    nn::ForwardCache cache;
    const Matrix out = expert.Forward(normalizer_.Normalize(b.obs), &cache);
    const Matrix diff = out - b.actions;
    mse = diff.squaredNorm() / b.size();
    opt.Step(expert, expert.Backward(cache, (2.0 / b.size()) * diff));
  }
  expert_ = std::move(expert);
  return mse;
}

void Agent::ObserveEpisode(const replay::Episode& episode) {
  if (episode.empty()) return;
  Matrix samples(env::kObsDim, episode.size() + 1);
  for (std::size_t t = 0; t < episode.size(); ++t) {
    samples.col(t) = episode[t].obs.ToVector();
  }
  samples.col(episode.size()) = episode.back().next_obs.ToVector();
  normalizer_.Update(samples);
}

nlohmann::json Agent::ToJson() const {
  nlohmann::json critics = nlohmann::json::array();
  nlohmann::json targets = nlohmann::json::array();
  for (int c = 0; c < num_critics(); ++c) {
    critics.push_back(nn::MlpToJson(critics_[c]));
    targets.push_back(nn::MlpToJson(target_critics_[c]));
  }
  nlohmann::json j = {{"config", AgentConfigToJson(config_)},
                      {"updates", updates_},
                      {"normalizer", normalizer_.ToJson()},
                      {"actor", nn::MlpToJson(actor_)},
                      {"target_actor", nn::MlpToJson(target_actor_)},
                      {"critics", critics},
                      {"target_critics", targets}};
  if (expert_) j["expert"] = nn::MlpToJson(*expert_);
  return j;
}

Agent Agent::FromJson(const nlohmann::json& j) {
  Agent agent(AgentConfigFromJson(j.at("config")));
  auto load = [](nn::Mlp& into, const nlohmann::json& data) {
    nn::Mlp net = nn::MlpFromJson(data);
    Require(net.SameArchitecture(into), ErrorCode::kCheckpointIncompatible,
            "stored network architecture does not match the agent config");
    into = std::move(net);
  };
  load(agent.actor_, j.at("actor"));
  load(agent.target_actor_, j.at("target_actor"));
  const auto& critics = j.at("critics");
  const auto& targets = j.at("target_critics");
  Require(static_cast<int>(critics.size()) == agent.num_critics() &&
              targets.size() == critics.size(),
          ErrorCode::kCheckpointIncompatible, "critic count mismatch");
  for (int c = 0; c < agent.num_critics(); ++c) {
    load(agent.critics_[c], critics[c]);
    load(agent.target_critics_[c], targets[c]);
  }
  if (j.contains("expert")) {
    nn::Mlp expert = nn::MlpFromJson(j.at("expert"));
    Require(expert.SameArchitecture(agent.actor_),
            ErrorCode::kCheckpointIncompatible, "expert architecture mismatch");
    agent.expert_ = std::move(expert);
  }
  agent.normalizer_ = nn::Normalizer::FromJson(j.at("normalizer"));
  Require(agent.normalizer_.dim() == env::kObsDim,
          ErrorCode::kCheckpointIncompatible,
          "normalizer dimension does not match the observation");
  agent.updates_ = j.at("updates").get<std::int64_t>();
  return agent;
}

void WriteCheckpoint(const std::string& path, const Agent& agent,
                     const nlohmann::json& manifest) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorCode::kInvalidArgument, "cannot write " + path);
  out << nlohmann::json{{"manifest", manifest}, {"agent", agent.ToJson()}}.dump()
      << '\n';
}

LoadedCheckpoint ReadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kConfigurationError,
          "cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
  LoadedCheckpoint loaded;
  loaded.manifest = j.value("manifest", nlohmann::json::object());
  if (j.value("scripted", false)) {
    loaded.scripted = true;
    return loaded;
  }
  try {
    const auto& actor = j.at("agent").at("actor");
    const auto dims = actor.at("dims").get<std::vector<int>>();
    Require(dims.front() == env::kObsDim && dims.back() == env::kActDim,
            ErrorCode::kCheckpointIncompatible,
            "actor maps " + std::to_string(dims.front()) + " -> " +
                std::to_string(dims.back()) + ", environment needs " +
                std::to_string(env::kObsDim) + " -> " +
                std::to_string(env::kActDim));
    loaded.agent = Agent::FromJson(j.at("agent"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCheckpointIncompatible, path + ": " + e.what());
  }
  return loaded;
}

}  // namespace tissue_retract::agents
