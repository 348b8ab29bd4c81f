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

#ifndef TISSUE_RETRACT_ENV_TISSUE_RETRACT_ENV_H_
#define TISSUE_RETRACT_ENV_TISSUE_RETRACT_ENV_H_

// Goal-conditioned tissue retraction MDP. The arm must grasp a designated
// anchor node of the tissue sheet and hold it within a tolerance of a goal
// point. Rewards are sparse: 0 on success, -1 otherwise.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "tissue_retract/common/types.h"
#include "tissue_retract/kinematics/arm.h"
#include "tissue_retract/sim/tissue.h"

namespace tissue_retract::env {

constexpr int kObsDim = 14;
constexpr int kGoalDim = 3;
constexpr int kActDim = 4;
// Offset of desired_goal inside the flat observation vector.
constexpr int kGoalOffset = 11;

using ObsVector = Eigen::Matrix<double, kObsDim, 1>;
using ActVector = Eigen::Matrix<double, kActDim, 1>;

enum class TaskId { kI = 1, kII = 2, kIII = 3 };

std::string_view TaskName(TaskId task);  // "I", "II", "III"
TaskId ParseTaskId(std::string_view text);

struct Workspace {
  double x_min = -0.03;
  double x_max = 0.03;
  double y_min = -0.03;
  double y_max = 0.03;
};

struct Box3 {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  bool Contains(const Vec3& p) const;
  Vec3 Clamp(const Vec3& p) const;
};

struct TaskSpec {
  TaskId task_id = TaskId::kI;
  double success_tolerance = 0.005;  // epsilon, meters
  double retract_height = 0.04;      // Task I lift
  Workspace workspace;               // tissue center and arm base jitter
  // Target point sampling box, as an offset from the anchor's rest position
  // (Tasks II and III).
  Box3 target_region{Vec3(-0.02, -0.02, 0.02), Vec3(0.02, 0.02, 0.04)};

  void Validate() const;
};

struct TissueParams {
  int rows = 9;
  int cols = 9;
  double spacing = 0.01;
  double node_mass = 0.01;
  sim::StiffnessSet stiffness;
  // Control periods used to let the fresh sheet sag to equilibrium.
  int settle_steps = 60;
};

struct EnvConfig {
  TaskSpec task;
  sim::PhysicsConfig physics;
  TissueParams tissue;
  kinematics::ArmModel arm = kinematics::ArmModel::Default();
  kinematics::JointVector home = kinematics::ArmModel::DefaultHome();
  kinematics::IkOptions ik;
  // Nominal arm base position relative to the tissue center.
  Vec3 base_offset = Vec3(-0.12, 0.0, 0.10);
  double max_step = 0.005;  // meters per unit action, per axis
  int horizon = 50;
  // End-effector target box relative to the tissue center.
  Box3 ee_bounds{Vec3(-0.10, -0.10, -0.05), Vec3(0.10, 0.10, 0.12)};
  int max_reset_retries = 16;

  void Validate() const;
};

struct Observation {
  Vec3 ee_position = Vec3::Zero();
  double gripper = 1.0;
  Vec3 anchor_position = Vec3::Zero();
  Vec3 rel_anchor = Vec3::Zero();  // anchor - ee
  Vec3 desired_goal = Vec3::Zero();
  Vec3 achieved_goal = Vec3::Zero();  // designated anchor position
  double grasp_flag = 0.0;

  // [ee(3), gripper, anchor(3), rel_anchor(3), grasp_flag, desired_goal(3)].
  // achieved_goal is not repeated; it equals the anchor entries.
  ObsVector ToVector() const;
  bool AllFinite() const;
};

struct Action {
  Vec3 delta = Vec3::Zero();  // each component in [-1, 1]
  double grip_cmd = 0.0;      // < 0 close, >= 0 open

  static Action FromVector(const ActVector& v);  // clamps
  ActVector ToVector() const;
  Action Clamped() const;
};

struct StepInfo {
  bool success = false;
  bool grip_lost = false;
  double max_strain = 0.0;
};

struct Transition {
  Observation obs;
  Action action;
  double reward = -1.0;
  Observation next_obs;
  bool done = false;
  StepInfo info;
};

// 0 when |achieved - desired| <= tolerance, else -1.
double ComputeReward(const Vec3& achieved, const Vec3& desired,
                     double tolerance);

// Success means the anchor sits within tolerance of the goal while grasped.
bool CheckSuccess(const Vec3& anchor, const Vec3& goal, double tolerance,
                  bool grasped);

class TissueRetractEnv {
 public:
  explicit TissueRetractEnv(EnvConfig config);

  // Starts a new episode from a seeded RNG stream. Throws configuration-error
  // if no reachable layout is found within config.max_reset_retries draws.
  Observation Reset(std::uint64_t seed);

  // Throws episode-finished once the episode is done, invalid-state before
  // the first Reset.
  Transition Step(const Action& action);

  Observation Observe() const;
  bool CheckSuccess() const;

  const EnvConfig& config() const { return config_; }
  const sim::TissueMesh& mesh() const { return mesh_; }
  const kinematics::ArmModel& arm() const { return arm_; }
  const kinematics::ArmState& arm_state() const { return arm_state_; }
  const Vec3& ee_position() const { return ee_position_; }
  const Vec3& goal() const { return goal_; }
  const Vec3& tissue_center() const { return tissue_center_; }
  sim::AnchorSite designated_site() const { return site_; }
  int designated_anchor() const { return mesh_.anchors[site_]; }
  int step_count() const { return step_count_; }
  bool done() const { return done_; }
  bool active() const { return active_; }

  // The settled sheet centered at the origin, used as the reset template.
  const sim::TissueMesh& rest_template() const { return template_; }

 private:
  bool TryLayout(Rng& rng);

  EnvConfig config_;
  sim::TissueMesh template_;
  sim::TissueMesh mesh_;
  kinematics::ArmModel arm_;
  kinematics::ArmState arm_state_;
  Vec3 ee_position_ = Vec3::Zero();
  Vec3 goal_ = Vec3::Zero();
  Vec3 tissue_center_ = Vec3::Zero();
  sim::AnchorSite site_ = sim::kCenterAnchor;
  int step_count_ = 0;
  bool done_ = false;
  bool active_ = false;
};

// Builds and settles a tissue sheet centered at the origin.
sim::TissueMesh BuildSettledTissue(const TissueParams& params,
                                   const sim::PhysicsConfig& physics);

}  // namespace tissue_retract::env

#endif  // TISSUE_RETRACT_ENV_TISSUE_RETRACT_ENV_H_
