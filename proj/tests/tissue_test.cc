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

#include "tissue_retract/sim/tissue.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <utility>

#include <gtest/gtest.h>
#include "tissue_retract/common/error.h"

namespace tissue_retract::sim {
namespace {

constexpr double kSpacing = 0.01;
constexpr double kMass = 0.01;

TissueMesh DefaultMesh() { return BuildTissue(9, 9, kSpacing, kMass, {}); }

// Two nodes joined by one spring; node 0 pinned above node 1.
TissueMesh HangingPair(double k, double rest) {
  TissueMesh mesh;
  mesh.rows = 1;
  mesh.cols = 2;
  mesh.nodes = {{Vec3(0, 0, 0), Vec3::Zero(), kMass},
                {Vec3(0, 0, -rest), Vec3::Zero(), kMass}};
  mesh.springs = {{0, 1, rest, k, SpringKind::kStructural}};
  mesh.pinned = {0};
  mesh.is_pinned = {1, 0};
  return mesh;
}

TissueMesh PerturbedMesh(std::uint64_t seed, double scale) {
  TissueMesh mesh = DefaultMesh();
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, scale);
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    if (mesh.is_pinned[i]) continue;
    mesh.nodes[i].position += Vec3(noise(rng), noise(rng), noise(rng));
  }
  return mesh;
}

// --------------------------------- build ------------------------------------

TEST(BuildTissueTest, SmallestGrid) {
  const TissueMesh mesh = BuildTissue(3, 3, kSpacing, kMass, {});
  EXPECT_EQ(mesh.nodes.size(), 9u);
  EXPECT_EQ(mesh.pinned.size(), 4u);
  const std::set<int> anchors(mesh.anchors.begin(), mesh.anchors.end());
  EXPECT_EQ(anchors.size(), 3u);
}

TEST(BuildTissueTest, StructuralSpringsMatchGridGraph) {
  const TissueMesh mesh = DefaultMesh();
  EXPECT_EQ(mesh.nodes.size(), 81u);

  // Enumerate grid-graph edges: node pairs at exactly one spacing.
  std::set<std::pair<int, int>> edges;
  for (int a = 0; a < 81; ++a) {
    for (int b = a + 1; b < 81; ++b) {
      const int dr = std::abs(a / 9 - b / 9);
      const int dc = std::abs(a % 9 - b % 9);
      if (dr + dc == 1) edges.insert({a, b});
    }
  }
  std::set<std::pair<int, int>> structural;
  for (const Spring& s : mesh.springs) {
    if (s.kind != SpringKind::kStructural) continue;
    structural.insert({std::min(s.node_a, s.node_b), std::max(s.node_a, s.node_b)});
  }
  EXPECT_EQ(edges.size(), 144u);
  EXPECT_EQ(structural, edges);
}

TEST(BuildTissueTest, RejectsThinGrid) {
  try {
    BuildTissue(2, 5, kSpacing, kMass, {});
    FAIL() << "expected invalid-argument";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(BuildTissueTest, MeshInvariants) {
  const TissueMesh mesh = BuildTissue(5, 7, kSpacing, kMass, {});
  for (const Spring& s : mesh.springs) {
    EXPECT_NE(s.node_a, s.node_b);
    EXPECT_GE(s.node_a, 0);
    EXPECT_LT(s.node_b, static_cast<int>(mesh.nodes.size()));
    EXPECT_GT(s.rest_length, 0.0);
    EXPECT_GT(s.stiffness, 0.0);
  }
  EXPECT_EQ(mesh.pinned, (std::vector<int>{0, 6, 28, 34}));
  EXPECT_EQ(mesh.anchors[kCenterAnchor], mesh.NodeIndex(2, 3));
  EXPECT_EQ(mesh.anchors[kLeftAnchor], mesh.NodeIndex(2, 0));
  EXPECT_EQ(mesh.anchors[kRightAnchor], mesh.NodeIndex(2, 6));
  EXPECT_DOUBLE_EQ(MaxStrain(mesh), 0.0);
}

// ------------------------------- spring force -------------------------------

TEST(SpringForceTest, ZeroAtRest) {
  const TissueMesh mesh = HangingPair(100.0, 0.01);
  const SpringForce f = ComputeSpringForce(mesh.springs[0], mesh.nodes);
  EXPECT_EQ(f.on_a, Vec3::Zero());
  EXPECT_FALSE(f.degenerate);
}

TEST(SpringForceTest, HookeMagnitudeAndDirection) {
  TissueMesh mesh = HangingPair(100.0, 0.01);
  mesh.nodes[1].position = Vec3(0, 0, -0.02);
  const SpringForce f = ComputeSpringForce(mesh.springs[0], mesh.nodes);
  EXPECT_NEAR(f.on_a.norm(), 1.0, 1e-12);
  // Stretched: node a is pulled toward node b (downward).
  EXPECT_LT(f.on_a.z(), 0.0);
}

TEST(SpringForceTest, CoincidentEndpointsFlagged) {
  TissueMesh mesh = HangingPair(100.0, 0.01);
  mesh.nodes[1].position = mesh.nodes[0].position;
  const SpringForce f = ComputeSpringForce(mesh.springs[0], mesh.nodes);
  EXPECT_TRUE(f.degenerate);
  EXPECT_EQ(f.on_a, Vec3::Zero());
}

TEST(SpringForceTest, ActionReactionOverMesh) {
  const TissueMesh mesh = PerturbedMesh(3, 0.003);
  Vec3 total = Vec3::Zero();
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    total += NetSpringForce(mesh, static_cast<int>(i));
  }
  EXPECT_LE(total.norm(), 1e-9);
}

// ---------------------------------- step ------------------------------------

TEST(StepPhysicsTest, AllPinnedIsStatic) {
  TissueMesh mesh = PerturbedMesh(5, 0.002);
  mesh.is_pinned.assign(mesh.nodes.size(), 1);
  mesh.pinned.clear();
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    mesh.pinned.push_back(static_cast<int>(i));
  }
  const TissueMesh before = mesh;
  PhysicsConfig config;
  config.gravity = Vec3(0, 0, -9.81);
  for (int i = 0; i < 10; ++i) StepPhysics(mesh, config, std::nullopt);
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    EXPECT_EQ(mesh.nodes[i].position, before.nodes[i].position);
  }
}

TEST(StepPhysicsTest, HangingNodeEquilibrium) {
  const double k = 50.0;
  TissueMesh mesh = HangingPair(k, 0.01);
  PhysicsConfig config;
  config.gravity = Vec3(0, 0, -9.81);
  for (int i = 0; i < 400; ++i) StepPhysics(mesh, config, std::nullopt);
  const double extension = -mesh.nodes[1].position.z() - 0.01;
  const double expected = kMass * 9.81 / k;
  EXPECT_NEAR(extension / expected, 1.0, 1e-3);
}

TEST(StepPhysicsTest, PinnedCornersBitStable) {
  TissueMesh mesh = PerturbedMesh(11, 0.002);
  PhysicsConfig config;
  config.substeps_per_control = 1;
  std::vector<Vec3> corners;
  for (int p : mesh.pinned) corners.push_back(mesh.nodes[p].position);
  for (int i = 0; i < 10000; ++i) StepPhysics(mesh, config, std::nullopt);
  for (std::size_t j = 0; j < mesh.pinned.size(); ++j) {
    EXPECT_EQ(mesh.nodes[mesh.pinned[j]].position, corners[j]);
    EXPECT_EQ(mesh.nodes[mesh.pinned[j]].velocity, Vec3::Zero());
  }
}

TEST(StepPhysicsTest, Deterministic) {
  TissueMesh a = PerturbedMesh(2, 0.002);
  TissueMesh b = a;
  ASSERT_TRUE(TryGrasp(a, {}, a.Position(a.anchors[kCenterAnchor])));
  ASSERT_TRUE(TryGrasp(b, {}, b.Position(b.anchors[kCenterAnchor])));
  const Vec3 ee = a.Position(a.anchors[kCenterAnchor]) + Vec3(0, 0, 0.004);
  for (int i = 0; i < 20; ++i) {
    StepPhysics(a, {}, ee);
    StepPhysics(b, {}, ee);
  }
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    EXPECT_EQ(a.nodes[i].position, b.nodes[i].position);
    EXPECT_EQ(a.nodes[i].velocity, b.nodes[i].velocity);
  }
}

TEST(StepPhysicsTest, MechanicalEnergyDecaysWithoutGravity) {
  PhysicsConfig config;
  config.gravity = Vec3::Zero();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TissueMesh mesh = PerturbedMesh(seed, 0.002);
    double previous = KineticEnergy(mesh) + SpringPotentialEnergy(mesh);
    for (int i = 0; i < 50; ++i) {
      StepPhysics(mesh, config, std::nullopt);
      const double energy = KineticEnergy(mesh) + SpringPotentialEnergy(mesh);
      ASSERT_LE(energy, previous) << "seed " << seed << " step " << i;
      previous = energy;
    }
  }
}

// Grasps the center anchor of a gravity-free mesh and moves the jaw up by
// `lift` in one control step.
StepReport LiftCenter(double lift, TissueMesh* out = nullptr) {
  TissueMesh mesh = DefaultMesh();
  PhysicsConfig config;
  config.gravity = Vec3::Zero();
  const Vec3 anchor = mesh.Position(mesh.anchors[kCenterAnchor]);
  EXPECT_TRUE(TryGrasp(mesh, config, anchor));
  const StepReport report = StepPhysics(mesh, config, anchor + Vec3(0, 0, lift));
  if (out) *out = mesh;
  return report;
}

// Spring tension on the center node when it alone is lifted by `lift`.
double AnalyticCenterForce(double lift) {
  TissueMesh mesh = DefaultMesh();
  const int center = mesh.anchors[kCenterAnchor];
  mesh.nodes[center].position.z() += lift;
  Vec3 total = Vec3::Zero();
  for (const Spring& s : mesh.springs) {
    if (s.node_a != center && s.node_b != center) continue;
    const int other = s.node_a == center ? s.node_b : s.node_a;
    const Vec3 d = mesh.Position(center) - mesh.Position(other);
    total += -s.stiffness * (d.norm() - s.rest_length) * d / d.norm();
  }
  return total.norm();
}

TEST(StepPhysicsTest, GraspBreaksAboveThreshold) {
  // Large lift: even the neighbors' catch-up cannot keep tension below 2.5 N.
  ASSERT_GT(AnalyticCenterForce(0.08), 2.5);
  TissueMesh mesh;
  const StepReport report = LiftCenter(0.08, &mesh);
  EXPECT_TRUE(report.grasp_released);
  EXPECT_GT(report.release_force, 2.5);
  EXPECT_FALSE(mesh.grasped.has_value());
}

TEST(StepPhysicsTest, GraspHoldsBelowThreshold) {
  ASSERT_LT(AnalyticCenterForce(0.002), 2.5);
  const StepReport report = LiftCenter(0.002);
  EXPECT_FALSE(report.grasp_released);
  EXPECT_LE(report.peak_grasp_force, 2.5);
  EXPECT_LE(report.peak_grasp_force, AnalyticCenterForce(0.002) + 1e-9);
}

TEST(StepPhysicsTest, ReleaseIffForceAboveThreshold) {
  int released = 0;
  int held = 0;
  for (double lift = 0.002; lift < 0.1; lift += 0.004) {
    const StepReport report = LiftCenter(lift);
    ++(report.grasp_released ? released : held);
    if (report.grasp_released) {
      EXPECT_GT(report.release_force, 2.5) << lift;
    } else {
      EXPECT_LE(report.peak_grasp_force, 2.5) << lift;
    }
  }
  EXPECT_GT(released, 0);
  EXPECT_GT(held, 0);
}

TEST(StepPhysicsTest, NonFiniteStateDiverges) {
  TissueMesh mesh = DefaultMesh();
  mesh.nodes[40].velocity.x() = std::numeric_limits<double>::infinity();
  try {
    StepPhysics(mesh, {}, std::nullopt);
    FAIL() << "expected simulation-diverged";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSimulationDiverged);
  }
}

// ---------------------------------- grasp -----------------------------------

TEST(GraspTest, JawAtAnchor) {
  TissueMesh mesh = DefaultMesh();
  EXPECT_TRUE(TryGrasp(mesh, {}, mesh.Position(mesh.anchors[kLeftAnchor])));
  EXPECT_EQ(mesh.grasped->node, mesh.anchors[kLeftAnchor]);
  EXPECT_EQ(mesh.grasped->offset, Vec3::Zero());
}

TEST(GraspTest, JustOutsideRadius) {
  TissueMesh mesh = DefaultMesh();
  const PhysicsConfig config;
  const Vec3 jaw = mesh.Position(mesh.anchors[kLeftAnchor]) -
                   Vec3(config.grasp_radius + 1e-6, 0, 0);
  EXPECT_FALSE(TryGrasp(mesh, config, jaw));
  EXPECT_FALSE(mesh.grasped.has_value());
}

TEST(GraspTest, NearestAnchorWins) {
  PhysicsConfig config;
  config.grasp_radius = 0.2;  // every anchor in range
  Rng rng(17);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int trial = 0; trial < 200; ++trial) {
    TissueMesh mesh = DefaultMesh();
    const Vec3 jaw(u(rng), u(rng), 0.3 * u(rng));
    int nearest = -1;
    double best = 1e9;
    for (int a : mesh.anchors) {
      const double d = (mesh.Position(a) - jaw).norm();
      if (d < best) best = d, nearest = a;
    }
    ASSERT_TRUE(TryGrasp(mesh, config, jaw));
    EXPECT_EQ(mesh.grasped->node, nearest);
  }
}

TEST(GraspTest, SecondGraspRefused) {
  TissueMesh mesh = DefaultMesh();
  ASSERT_TRUE(TryGrasp(mesh, {}, mesh.Position(mesh.anchors[kLeftAnchor])));
  EXPECT_FALSE(TryGrasp(mesh, {}, mesh.Position(mesh.anchors[kRightAnchor])));
  EXPECT_EQ(mesh.grasped->node, mesh.anchors[kLeftAnchor]);
}

TEST(GraspTest, ReleaseIsIdempotent) {
  TissueMesh mesh = DefaultMesh();
  ASSERT_TRUE(TryGrasp(mesh, {}, mesh.Position(mesh.anchors[kCenterAnchor])));
  ReleaseGrasp(mesh);
  EXPECT_FALSE(mesh.grasped.has_value());
  const TissueMesh once = mesh;
  ReleaseGrasp(mesh);
  EXPECT_FALSE(mesh.grasped.has_value());
  EXPECT_EQ(mesh.nodes[40].position, once.nodes[40].position);
}

TEST(GraspTest, ReleasedAnchorRecoils) {
  TissueMesh mesh;
  LiftCenter(0.004, &mesh);
  ASSERT_TRUE(mesh.grasped.has_value());
  ReleaseGrasp(mesh);
  const int center = mesh.anchors[kCenterAnchor];
  const Vec3 before = mesh.Position(center);
  PhysicsConfig config;
  config.gravity = Vec3::Zero();
  StepPhysics(mesh, config, std::nullopt);
  EXPECT_LT(mesh.Position(center).z(), before.z());
}

// --------------------------------- strain -----------------------------------

TEST(MaxStrainTest, DoubledSpring) {
  TissueMesh mesh = HangingPair(100.0, 0.01);
  mesh.nodes[1].position.z() = -0.02;
  EXPECT_DOUBLE_EQ(MaxStrain(mesh), 1.0);
}

TEST(MaxStrainTest, MatchesFullScan) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TissueMesh mesh = PerturbedMesh(seed, 0.002);
    double expected = 0.0;
    for (const Spring& s : mesh.springs) {
      const double len = (mesh.Position(s.node_a) - mesh.Position(s.node_b)).norm();
      expected = std::max(expected, std::abs(len - s.rest_length) / s.rest_length);
    }
    EXPECT_DOUBLE_EQ(MaxStrain(mesh), expected);
  }
}

TEST(PhysicsConfigTest, Validate) {
  PhysicsConfig config;
  EXPECT_NO_THROW(config.Validate());
  config.substeps_per_control = 0;
  EXPECT_THROW(config.Validate(), Error);
  config = {};
  config.grasp_radius = 0.0;
  EXPECT_THROW(config.Validate(), Error);
}

}  // namespace
}  // namespace tissue_retract::sim
