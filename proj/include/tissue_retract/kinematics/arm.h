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

#ifndef TISSUE_RETRACT_KINEMATICS_ARM_H_
#define TISSUE_RETRACT_KINEMATICS_ARM_H_

// Six-joint serial arm described by standard Denavit-Hartenberg rows
// (T_i = Rz(theta) Tz(d) Tx(a) Rx(alpha)). The default chain mimics a
// patient-side manipulator: base yaw, pitch, tool-shaft insertion, shaft
// roll, wrist pitch and jaw rotation.

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "tissue_retract/common/types.h"

namespace tissue_retract::kinematics {

constexpr int kNumJoints = 6;

using JointVector = Eigen::Matrix<double, kNumJoints, 1>;
using PositionJacobian = Eigen::Matrix<double, 3, kNumJoints>;

enum class JointType { kRevolute, kPrismatic };

struct DhRow {
  double a = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double theta_offset = 0.0;
  JointType type = JointType::kRevolute;
  // Joint value units per radian (revolute) or meter (prismatic).
  double unit_scale = 1.0;
};

struct JointLimit {
  double lo = 0.0;
  double hi = 0.0;
};

struct ArmModel {
  std::array<DhRow, kNumJoints> dh_rows{};
  std::array<JointLimit, kNumJoints> joint_limits{};
  Eigen::Isometry3d base = Eigen::Isometry3d::Identity();

  // PSM-like chain with about 0.3 m reach.
  static ArmModel Default();
  // A mid-range configuration with the tool pointing down and forward.
  static JointVector DefaultHome();

  void Validate() const;
  JointVector Clamp(const JointVector& q) const;
  bool WithinLimits(const JointVector& q) const;
  // Upper bound on the distance from the base origin to the end effector.
  double MaxReach() const;
};

struct ArmState {
  JointVector q = JointVector::Zero();
  double gripper = 1.0;  // 0 closed, 1 open
};

struct Pose {
  Vec3 position = Vec3::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

// Homogeneous transform of one DH row at joint value `q`.
Eigen::Matrix4d DhTransform(const DhRow& row, double q);

Pose ForwardKinematics(const ArmModel& model, const JointVector& q);

// Column j is d(end-effector position)/d(q_j), from the joint axes.
PositionJacobian ComputePositionJacobian(const ArmModel& model,
                                         const JointVector& q);

struct IkOptions {
  double damping = 0.05;  // lambda in J^T (J J^T + lambda^2 I)^-1
  double tolerance = 1e-4;
  int max_iters = 200;
};

struct IkResult {
  JointVector q = JointVector::Zero();
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  // Residual before the first iteration and after each accepted one; never
  // increasing.
  std::vector<double> residual_trace;
};

// Damped least-squares position IK, clamped to joint limits. Never throws;
// returns the best configuration found.
IkResult SolveIk(const ArmModel& model, const Vec3& target,
                 const JointVector& q0, const IkOptions& options = {});

// As SolveIk, but throws ik-failed (with the residual) when not converged.
JointVector InverseKinematics(const ArmModel& model, const Vec3& target,
                              const JointVector& q0,
                              const IkOptions& options = {});

}  // namespace tissue_retract::kinematics

#endif  // TISSUE_RETRACT_KINEMATICS_ARM_H_
