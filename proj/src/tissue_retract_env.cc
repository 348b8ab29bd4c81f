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

#include "tissue_retract/env/tissue_retract_env.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "tissue_retract/common/error.h"

namespace tissue_retract::env {

std::string_view TaskName(TaskId task) {
  switch (task) {
    case TaskId::kI: return "I";
    case TaskId::kII: return "II";
    case TaskId::kIII: return "III";
  }
  return "?";
}

TaskId ParseTaskId(std::string_view text) {
  if (text == "I" || text == "1") return TaskId::kI;
  if (text == "II" || text == "2") return TaskId::kII;
  if (text == "III" || text == "3") return TaskId::kIII;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown task '" + std::string(text) + "' (expected I, II or III)");
}

bool Box3::Contains(const Vec3& p) const {
  return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
}

Vec3 Box3::Clamp(const Vec3& p) const {
  return p.cwiseMax(lo).cwiseMin(hi);
}

void TaskSpec::Validate() const {
  Require(workspace.x_min < workspace.x_max && workspace.y_min < workspace.y_max,
          ErrorCode::kInvalidArgument, "workspace bounds must satisfy min < max");
  Require(success_tolerance > 0.0, ErrorCode::kInvalidArgument,
          "success tolerance must be positive");
  Require(retract_height > 0.0, ErrorCode::kInvalidArgument,
          "retract height must be positive");
  Require((target_region.lo.array() <= target_region.hi.array()).all(),
          ErrorCode::kInvalidArgument, "target region must satisfy lo <= hi");
}

void EnvConfig::Validate() const {
  task.Validate();
  physics.Validate();
  arm.Validate();
  Require(tissue.rows >= 3 && tissue.cols >= 3, ErrorCode::kInvalidArgument,
          "tissue grid needs at least 3x3 nodes");
  Require(tissue.settle_steps >= 0, ErrorCode::kInvalidArgument,
          "settle_steps must be non-negative");
  Require(max_step > 0.0, ErrorCode::kInvalidArgument,
          "max_step must be positive");
  Require(horizon >= 1, ErrorCode::kInvalidArgument, "horizon must be >= 1");
  Require(max_reset_retries >= 1, ErrorCode::kInvalidArgument,
          "max_reset_retries must be >= 1");
  Require(arm.WithinLimits(home), ErrorCode::kInvalidArgument,
          "home configuration violates joint limits");
}

ObsVector Observation::ToVector() const {
  ObsVector v;
  v << ee_position, gripper, anchor_position, rel_anchor, grasp_flag,
      desired_goal;
  return v;
}

bool Observation::AllFinite() const {
  return ToVector().allFinite() && achieved_goal.allFinite();
}

Action Action::FromVector(const ActVector& v) {
  Action a;
  a.delta = v.head<3>();
  a.grip_cmd = v[3];
  return a.Clamped();
}

ActVector Action::ToVector() const {
  ActVector v;
  v << delta, grip_cmd;
  return v;
}

Action Action::Clamped() const {
  Action a;
  a.delta = delta.cwiseMax(-1.0).cwiseMin(1.0);
  a.grip_cmd = std::clamp(grip_cmd, -1.0, 1.0);
  return a;
}

double ComputeReward(const Vec3& achieved, const Vec3& desired,
                     double tolerance) {
  return (achieved - desired).norm() <= tolerance ? 0.0 : -1.0;
}

bool CheckSuccess(const Vec3& anchor, const Vec3& goal, double tolerance,
                  bool grasped) {
  return grasped && ComputeReward(anchor, goal, tolerance) == 0.0;
}

sim::TissueMesh BuildSettledTissue(const TissueParams& params,
                                   const sim::PhysicsConfig& physics) {
  sim::TissueMesh mesh =
      sim::BuildTissue(params.rows, params.cols, params.spacing,
                       params.node_mass, params.stiffness);
  for (int i = 0; i < params.settle_steps; ++i) {
    sim::StepPhysics(mesh, physics, std::nullopt);
  }
  for (sim::Node& node : mesh.nodes) node.velocity.setZero();
  return mesh;
}

TissueRetractEnv::TissueRetractEnv(EnvConfig config)
    : config_(std::move(config)) {
  config_.Validate();
  template_ = BuildSettledTissue(config_.tissue, config_.physics);
  arm_ = config_.arm;
}

bool TissueRetractEnv::TryLayout(Rng& rng) {
  const Workspace& ws = config_.task.workspace;
  std::uniform_real_distribution<double> ux(ws.x_min, ws.x_max);
  std::uniform_real_distribution<double> uy(ws.y_min, ws.y_max);

  const double cx = ux(rng);
  const double cy = uy(rng);
  const double bx = ux(rng);
  const double by = uy(rng);
  tissue_center_ = Vec3(cx, cy, 0.0);

  site_ = sim::kCenterAnchor;
  if (config_.task.task_id == TaskId::kIII) {
    std::uniform_int_distribution<int> pick(0, 2);
    site_ = static_cast<sim::AnchorSite>(pick(rng));
  }

  mesh_ = template_;
  mesh_.Translate(tissue_center_);
  const Vec3 anchor = mesh_.Position(mesh_.anchors[site_]);

  if (config_.task.task_id == TaskId::kI) {
    goal_ = anchor + Vec3(0.0, 0.0, config_.task.retract_height);
  } else {
    const Box3& region = config_.task.target_region;
    Vec3 offset;
    for (int k = 0; k < 3; ++k) {
      std::uniform_real_distribution<double> u(region.lo[k], region.hi[k]);
      offset[k] = u(rng);
    }
    goal_ = anchor + offset;
  }

  arm_.base = Eigen::Isometry3d::Identity();
  arm_.base.translation() = config_.base_offset + Vec3(bx, by, 0.0);
  arm_state_.q = config_.home;
  arm_state_.gripper = 1.0;
  ee_position_ = kinematics::ForwardKinematics(arm_, arm_state_.q).position;

  // Every point the retraction has to visit must be reachable.
  const Box3 bounds{tissue_center_ + config_.ee_bounds.lo,
                    tissue_center_ + config_.ee_bounds.hi};
  for (const Vec3& p : {Vec3(anchor + Vec3(0.0, 0.0, 0.02)), anchor, goal_}) {
    if (!bounds.Contains(p)) return false;
    if (!kinematics::SolveIk(arm_, p, arm_state_.q, config_.ik).converged) {
      return false;
    }
  }
  return bounds.Contains(ee_position_);
}

Observation TissueRetractEnv::Reset(std::uint64_t seed) {
  Rng rng(seed);
  for (int attempt = 0; attempt < config_.max_reset_retries; ++attempt) {
    if (TryLayout(rng)) {
      step_count_ = 0;
      done_ = false;
      active_ = true;
      return Observe();
    }
  }
  active_ = false;
  throw Error(ErrorCode::kConfigurationError,
              "no reachable tissue/arm layout after " +
                  std::to_string(config_.max_reset_retries) + " draws");
}

Observation TissueRetractEnv::Observe() const {
  Observation obs;
  obs.ee_position = ee_position_;
  obs.gripper = arm_state_.gripper;
  obs.anchor_position = mesh_.Position(designated_anchor());
  obs.rel_anchor = obs.anchor_position - obs.ee_position;
  obs.desired_goal = goal_;
  obs.achieved_goal = obs.anchor_position;
  obs.grasp_flag = mesh_.grasped ? 1.0 : 0.0;
  return obs;
}

bool TissueRetractEnv::CheckSuccess() const {
  const bool holding_designated =
      mesh_.grasped && mesh_.grasped->node == designated_anchor();
  return env::CheckSuccess(mesh_.Position(designated_anchor()), goal_,
                           config_.task.success_tolerance, holding_designated);
}

Transition TissueRetractEnv::Step(const Action& action) {
  Require(active_, ErrorCode::kInvalidState, "step before reset");
  Require(!done_, ErrorCode::kEpisodeFinished,
          "episode finished after " + std::to_string(step_count_) + " steps");

  Transition tr;
  tr.obs = Observe();
  tr.action = action.Clamped();

  const Box3 bounds{tissue_center_ + config_.ee_bounds.lo,
                    tissue_center_ + config_.ee_bounds.hi};
  const Vec3 target =
      bounds.Clamp(ee_position_ + config_.max_step * tr.action.delta);
  arm_state_.q =
      kinematics::SolveIk(arm_, target, arm_state_.q, config_.ik).q;
  ee_position_ = kinematics::ForwardKinematics(arm_, arm_state_.q).position;

  if (tr.action.grip_cmd < 0.0) {
    arm_state_.gripper = 0.0;
    if (!mesh_.grasped) sim::TryGrasp(mesh_, config_.physics, ee_position_);
  } else {
    arm_state_.gripper = 1.0;
    sim::ReleaseGrasp(mesh_);
  }

  const sim::StepReport report =
      sim::StepPhysics(mesh_, config_.physics, ee_position_);

  ++step_count_;
  tr.next_obs = Observe();
  tr.info.success = CheckSuccess();
  tr.info.grip_lost = report.grasp_released;
  tr.info.max_strain = sim::MaxStrain(mesh_);
  tr.reward = tr.info.success ? 0.0 : -1.0;
  tr.done = tr.info.success || step_count_ >= config_.horizon;
  done_ = tr.done;
  return tr;
}

}  // namespace tissue_retract::env
