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

#include "tissue_retract/kinematics/arm.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "tissue_retract/common/error.h"

namespace tissue_retract::kinematics {

namespace {
constexpr double kPi = std::numbers::pi;
}  // namespace

ArmModel ArmModel::Default() {
  ArmModel model;
  model.dh_rows = {{
      {0.0, -kPi / 2, 0.0, 0.0, JointType::kRevolute, 1.0},
      {0.0, -kPi / 2, 0.0, -kPi / 2, JointType::kRevolute, 1.0},
      {0.0, 0.0, 0.0, 0.0, JointType::kPrismatic, 1.0},
      {0.0, kPi / 2, 0.0, 0.0, JointType::kRevolute, 1.0},
      {0.01, -kPi / 2, 0.0, 0.0, JointType::kRevolute, 1.0},
      {0.0, 0.0, 0.0, 0.0, JointType::kRevolute, 1.0},
  }};
  model.joint_limits = {{
      {-1.2, 1.2},
      {-0.2, 1.3},
      {0.02, 0.30},
      {-kPi, kPi},
      {-kPi / 2, kPi / 2},
      {-kPi, kPi},
  }};
  return model;
}

JointVector ArmModel::DefaultHome() {
  JointVector q;
  q << 0.0, 0.4636, 0.134, 0.0, 0.0, 0.0;
  return q;
}

void ArmModel::Validate() const {
  for (int j = 0; j < kNumJoints; ++j) {
    const JointLimit& lim = joint_limits[j];
    if (!(lim.lo < lim.hi)) {
      std::ostringstream msg;
      msg << "joint " << j << " limit lo (" << lim.lo << ") must be below hi ("
          << lim.hi << ")";
      throw Error(ErrorCode::kInvalidArgument, msg.str());
    }
    const DhRow& row = dh_rows[j];
    Require(std::isfinite(row.a) && std::isfinite(row.alpha) &&
                std::isfinite(row.d) && std::isfinite(row.theta_offset) &&
                row.unit_scale > 0.0,
            ErrorCode::kInvalidArgument, "DH row values must be finite");
  }
}

JointVector ArmModel::Clamp(const JointVector& q) const {
  JointVector out = q;
  for (int j = 0; j < kNumJoints; ++j) {
    out[j] = std::clamp(out[j], joint_limits[j].lo, joint_limits[j].hi);
  }
  return out;
}

bool ArmModel::WithinLimits(const JointVector& q) const {
  for (int j = 0; j < kNumJoints; ++j) {
    if (q[j] < joint_limits[j].lo || q[j] > joint_limits[j].hi) return false;
  }
  return true;
}

double ArmModel::MaxReach() const {
  double reach = 0.0;
  for (int j = 0; j < kNumJoints; ++j) {
    const DhRow& row = dh_rows[j];
    double d = std::abs(row.d);
    if (row.type == JointType::kPrismatic) {
      d = std::max(std::abs(row.d + row.unit_scale * joint_limits[j].lo),
                   std::abs(row.d + row.unit_scale * joint_limits[j].hi));
    }
    reach += std::abs(row.a) + d;
  }
  return reach;
}

Eigen::Matrix4d DhTransform(const DhRow& row, double q) {
  double theta = row.theta_offset;
  double d = row.d;
  if (row.type == JointType::kRevolute) {
    theta += row.unit_scale * q;
  } else {
    d += row.unit_scale * q;
  }
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  Eigen::Matrix4d t;
  t << ct, -st * ca, st * sa, row.a * ct,
       st, ct * ca, -ct * sa, row.a * st,
       0.0, sa, ca, d,
       0.0, 0.0, 0.0, 1.0;
  return t;
}

namespace {

// Frames 0..6 in world coordinates; frame 0 is the base.
std::array<Eigen::Matrix4d, kNumJoints + 1> ChainFrames(const ArmModel& model,
                                                        const JointVector& q) {
  std::array<Eigen::Matrix4d, kNumJoints + 1> frames;
  frames[0] = model.base.matrix();
  for (int j = 0; j < kNumJoints; ++j) {
    frames[j + 1] = frames[j] * DhTransform(model.dh_rows[j], q[j]);
  }
  return frames;
}

}  // namespace

Pose ForwardKinematics(const ArmModel& model, const JointVector& q) {
  const Eigen::Matrix4d& ee = ChainFrames(model, q)[kNumJoints];
  return {ee.block<3, 1>(0, 3), ee.block<3, 3>(0, 0)};
}

PositionJacobian ComputePositionJacobian(const ArmModel& model,
                                         const JointVector& q) {
  const auto frames = ChainFrames(model, q);
  const Vec3 p_ee = frames[kNumJoints].block<3, 1>(0, 3);
  PositionJacobian jac;
  for (int j = 0; j < kNumJoints; ++j) {
    const Vec3 axis = frames[j].block<3, 1>(0, 2);
    const Vec3 origin = frames[j].block<3, 1>(0, 3);
    const double scale = model.dh_rows[j].unit_scale;
    if (model.dh_rows[j].type == JointType::kRevolute) {
      jac.col(j) = scale * axis.cross(p_ee - origin);
    } else {
      jac.col(j) = scale * axis;
    }
  }
  return jac;
}

IkResult SolveIk(const ArmModel& model, const Vec3& target,
                 const JointVector& q0, const IkOptions& options) {
  IkResult result;
  result.q = model.Clamp(q0);
  Vec3 err = target - ForwardKinematics(model, result.q).position;
  result.residual = err.norm();
  result.residual_trace.push_back(result.residual);
  const double lambda2 = options.damping * options.damping;

  while (result.residual > options.tolerance &&
         result.iterations < options.max_iters) {
    ++result.iterations;
    // Joints resting on a limit and pushed outward are frozen and the step
    // re-solved with the remaining ones.
    PositionJacobian jac = ComputePositionJacobian(model, result.q);
    JointVector dq;
    for (int pass = 0; pass < kNumJoints; ++pass) {
      const Eigen::Matrix3d jjt =
          jac * jac.transpose() + lambda2 * Eigen::Matrix3d::Identity();
      dq = jac.transpose() * jjt.ldlt().solve(err);
      bool frozen = false;
      for (int j = 0; j < kNumJoints; ++j) {
        const JointLimit& lim = model.joint_limits[j];
        if (jac.col(j).isZero(0.0)) continue;
        if ((result.q[j] <= lim.lo && dq[j] < 0.0) ||
            (result.q[j] >= lim.hi && dq[j] > 0.0)) {
          jac.col(j).setZero();
          frozen = true;
        }
      }
      if (!frozen) break;
    }

    // Backtrack so the residual never grows; clamping at a limit can
    // otherwise overshoot.
    bool accepted = false;
    for (double step = 1.0; step > 1.0 / 64; step *= 0.5) {
      const JointVector candidate = model.Clamp(result.q + step * dq);
      const Vec3 cand_err =
          target - ForwardKinematics(model, candidate).position;
      const double cand_residual = cand_err.norm();
      if (cand_residual < result.residual) {
        result.q = candidate;
        err = cand_err;
        result.residual = cand_residual;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    result.residual_trace.push_back(result.residual);
  }
  result.converged = result.residual <= options.tolerance;
  return result;
}

JointVector InverseKinematics(const ArmModel& model, const Vec3& target,
                              const JointVector& q0, const IkOptions& options) {
  const IkResult result = SolveIk(model, target, q0, options);
  if (!result.converged) {
    std::ostringstream msg;
    msg << "no convergence after " << result.iterations
        << " iterations, residual " << result.residual << " m";
    throw Error(ErrorCode::kIkFailed, msg.str());
  }
  return result.q;
}

}  // namespace tissue_retract::kinematics
