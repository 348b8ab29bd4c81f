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

#include <cmath>
#include <random>

#include <Eigen/SVD>
#include <gtest/gtest.h>
#include "tissue_retract/common/error.h"

namespace tissue_retract::kinematics {
namespace {

// Rz(theta) Tz(d) Tx(a) Rx(alpha) assembled from elementary transforms.
Eigen::Isometry3d ElementaryDh(const DhRow& row, double q) {
  double theta = row.theta_offset;
  double d = row.d;
  (row.type == JointType::kRevolute ? theta : d) += row.unit_scale * q;
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.rotate(Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ()));
  t.translate(Eigen::Vector3d(0, 0, d));
  t.translate(Eigen::Vector3d(row.a, 0, 0));
  t.rotate(Eigen::AngleAxisd(row.alpha, Eigen::Vector3d::UnitX()));
  return t;
}

JointVector RandomConfig(const ArmModel& model, Rng& rng) {
  JointVector q;
  for (int j = 0; j < kNumJoints; ++j) {
    std::uniform_real_distribution<double> u(model.joint_limits[j].lo,
                                             model.joint_limits[j].hi);
    q[j] = u(rng);
  }
  return q;
}

ArmModel OffsetModel() {
  ArmModel model = ArmModel::Default();
  model.base.translation() = Vec3(-0.12, 0.0, 0.1);
  return model;
}

TEST(ForwardKinematicsTest, ZeroConfigMatchesElementaryProduct) {
  const ArmModel model = OffsetModel();
  Eigen::Isometry3d expected = model.base;
  for (const DhRow& row : model.dh_rows) expected = expected * ElementaryDh(row, 0.0);
  const Pose pose = ForwardKinematics(model, JointVector::Zero());
  EXPECT_TRUE(pose.position.isApprox(expected.translation(), 1e-12) ||
              (pose.position - expected.translation()).norm() < 1e-15);
  EXPECT_TRUE(pose.rotation.isApprox(expected.linear(), 1e-12));
}

TEST(ForwardKinematicsTest, RandomConfigsMatchElementaryProduct) {
  const ArmModel model = OffsetModel();
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const JointVector q = RandomConfig(model, rng);
    Eigen::Isometry3d expected = model.base;
    for (int j = 0; j < kNumJoints; ++j) {
      expected = expected * ElementaryDh(model.dh_rows[j], q[j]);
    }
    const Pose pose = ForwardKinematics(model, q);
    EXPECT_LT((pose.position - expected.translation()).norm(), 1e-14);
    EXPECT_LT((pose.rotation - expected.linear()).norm(), 1e-12);
  }
}

TEST(ForwardKinematicsTest, LastJointOnlyRotates) {
  const ArmModel model = ArmModel::Default();
  ASSERT_EQ(model.dh_rows[5].a, 0.0);
  ASSERT_EQ(model.dh_rows[5].d, 0.0);
  JointVector q = ArmModel::DefaultHome();
  const Pose before = ForwardKinematics(model, q);
  q[5] += 0.7;
  const Pose after = ForwardKinematics(model, q);
  EXPECT_LT((after.position - before.position).norm(), 1e-15);
  EXPECT_GT((after.rotation - before.rotation).norm(), 0.1);
}

TEST(ForwardKinematicsTest, Continuous) {
  const ArmModel model = ArmModel::Default();
  Rng rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const JointVector q = RandomConfig(model, rng);
    JointVector dir;
    for (int j = 0; j < kNumJoints; ++j) dir[j] = n(rng);
    double previous = 1e9;
    for (double h = 1e-1; h > 1e-7; h /= 10.0) {
      const double gap = (ForwardKinematics(model, q + h * dir).position -
                          ForwardKinematics(model, q).position)
                             .norm();
      EXPECT_LE(gap, previous);
      previous = gap;
    }
    EXPECT_LT(previous, 1e-6);
  }
}

TEST(ForwardKinematicsTest, BitDeterministic) {
  const ArmModel model = ArmModel::Default();
  const JointVector q = ArmModel::DefaultHome();
  const Pose a = ForwardKinematics(model, q);
  const Pose b = ForwardKinematics(model, q);
  EXPECT_EQ(a.position, b.position);
  EXPECT_EQ(a.rotation, b.rotation);
}

TEST(JacobianTest, MatchesCentralDifferences) {
  const ArmModel model = OffsetModel();
  Rng rng(7);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const JointVector q = RandomConfig(model, rng);
    const PositionJacobian jac = ComputePositionJacobian(model, q);
    PositionJacobian fd;
    for (int j = 0; j < kNumJoints; ++j) {
      JointVector plus = q, minus = q;
      plus[j] += h;
      minus[j] -= h;
      fd.col(j) = (ForwardKinematics(model, plus).position -
                   ForwardKinematics(model, minus).position) / (2.0 * h);
    }
    EXPECT_LT((jac - fd).norm() / jac.norm(), 1e-6) << "trial " << trial;
  }
}

TEST(JacobianTest, RankDropsAtZeroInsertion) {
  // With zero insertion the tool tip sits where the yaw and pitch axes meet.
  const ArmModel model = ArmModel::Default();
  const PositionJacobian jac =
      ComputePositionJacobian(model, JointVector::Zero());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const Eigen::VectorXd s = svd.singularValues();
  EXPECT_LT(s[2], 1e-9 * s[0]);
  EXPECT_GT(s[1], 1e-3);

  const PositionJacobian home =
      ComputePositionJacobian(model, ArmModel::DefaultHome());
  Eigen::JacobiSVD<Eigen::MatrixXd> home_svd(home);
  EXPECT_GT(home_svd.singularValues()[2], 1e-3);
}

TEST(JacobianTest, PrismaticUnitScaleIsLinear) {
  ArmModel scaled = ArmModel::Default();
  scaled.dh_rows[2].unit_scale = 2.5;
  const JointVector q = ArmModel::DefaultHome();
  const PositionJacobian a = ComputePositionJacobian(ArmModel::Default(), q);
  const PositionJacobian b = ComputePositionJacobian(scaled, q);
  EXPECT_LT((b.col(2) - 2.5 * a.col(2)).norm(), 1e-15);
}

TEST(IkTest, FixedPoint) {
  const ArmModel model = OffsetModel();
  const JointVector q = ArmModel::DefaultHome();
  const IkResult result =
      SolveIk(model, ForwardKinematics(model, q).position, q);
  EXPECT_TRUE(result.converged);
  EXPECT_EQ(result.iterations, 0);
  EXPECT_LE(result.residual, 1e-4);
  EXPECT_EQ(result.q, q);
}

// fk of a random in-limit configuration, redrawn until it lands in the
// working volume around the tissue.
Vec3 ReachableTarget(const ArmModel& model, Rng& rng) {
  const Vec3 lo(-0.06, -0.06, -0.04), hi(0.06, 0.06, 0.08);
  while (true) {
    const Vec3 p = ForwardKinematics(model, RandomConfig(model, rng)).position;
    if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all()) {
      return p;
    }
  }
}

TEST(IkTest, RoundTripOnReachableTargets) {
  const ArmModel model = OffsetModel();
  const IkOptions options;
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 target = ReachableTarget(model, rng);
    const JointVector q =
        InverseKinematics(model, target, ArmModel::DefaultHome(), options);
    EXPECT_LE((ForwardKinematics(model, q).position - target).norm(),
              options.tolerance)
        << "trial " << trial;
    EXPECT_TRUE(model.WithinLimits(q));
  }
}

TEST(IkTest, UnreachableTargetFails) {
  const ArmModel model = OffsetModel();
  const Vec3 target = model.base.translation() +
                      Vec3(2.0 * model.MaxReach(), 0.0, 0.0);
  try {
    InverseKinematics(model, target, ArmModel::DefaultHome());
    FAIL() << "expected ik-failed";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIkFailed);
  }
}

TEST(IkTest, LimitsRespectedAndResidualMonotone) {
  const ArmModel model = OffsetModel();
  Rng rng(13);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 target = model.base.translation() + Vec3(u(rng), u(rng), u(rng));
    const IkResult result = SolveIk(model, target, ArmModel::DefaultHome());
    EXPECT_TRUE(model.WithinLimits(result.q));
    ASSERT_FALSE(result.residual_trace.empty());
    for (std::size_t i = 1; i < result.residual_trace.size(); ++i) {
      EXPECT_LE(result.residual_trace[i], result.residual_trace[i - 1]);
    }
    EXPECT_DOUBLE_EQ(result.residual, result.residual_trace.back());
  }
}

TEST(ArmModelTest, ValidateRejectsInvertedLimits) {
  ArmModel model = ArmModel::Default();
  EXPECT_NO_THROW(model.Validate());
  model.joint_limits[1] = {1.0, -1.0};
  EXPECT_THROW(model.Validate(), Error);
}

}  // namespace
}  // namespace tissue_retract::kinematics
