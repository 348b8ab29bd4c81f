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
#include <string>

#include "tissue_retract/common/error.h"

namespace tissue_retract::sim {

void TissueMesh::Translate(const Vec3& offset) {
  for (Node& node : nodes) node.position += offset;
}

void PhysicsConfig::Validate() const {
  Require(dt > 0.0 && std::isfinite(dt), ErrorCode::kInvalidArgument,
          "physics dt must be positive");
  Require(substeps_per_control >= 1, ErrorCode::kInvalidArgument,
          "substeps_per_control must be >= 1");
  Require(gravity.allFinite(), ErrorCode::kInvalidArgument,
          "gravity must be finite");
  Require(damping >= 0.0 && damping * dt <= 1.0, ErrorCode::kInvalidArgument,
          "damping must lie in [0, 1/dt]");
  Require(grasp_radius > 0.0, ErrorCode::kInvalidArgument,
          "grasp_radius must be positive");
  Require(grasp_break_force > 0.0, ErrorCode::kInvalidArgument,
          "grasp_break_force must be positive");
}

TissueMesh BuildTissue(int rows, int cols, double spacing, double node_mass,
                       const StiffnessSet& stiffness, const Vec3& center) {
  Require(rows >= 3 && cols >= 3, ErrorCode::kInvalidArgument,
          "tissue grid needs at least 3x3 nodes, got " + std::to_string(rows) +
              "x" + std::to_string(cols));
  Require(spacing > 0.0 && node_mass > 0.0, ErrorCode::kInvalidArgument,
          "spacing and node mass must be positive");
  Require(stiffness.structural > 0.0 && stiffness.shear > 0.0 &&
              stiffness.bend > 0.0,
          ErrorCode::kInvalidArgument, "spring stiffness must be positive");

  TissueMesh mesh;
  mesh.rows = rows;
  mesh.cols = cols;
  mesh.nodes.resize(static_cast<size_t>(rows) * cols);
  const double x0 = -0.5 * spacing * (cols - 1);
  const double y0 = -0.5 * spacing * (rows - 1);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Node& node = mesh.nodes[mesh.NodeIndex(r, c)];
      node.position = center + Vec3(x0 + c * spacing, y0 + r * spacing, 0.0);
      node.mass = node_mass;
    }
  }

  auto connect = [&mesh](int a, int b, double k, SpringKind kind) {
    const double rest = (mesh.nodes[a].position - mesh.nodes[b].position).norm();
    mesh.springs.push_back({a, b, rest, k, kind});
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int i = mesh.NodeIndex(r, c);
      if (c + 1 < cols) {
        connect(i, mesh.NodeIndex(r, c + 1), stiffness.structural,
                SpringKind::kStructural);
      }
      if (r + 1 < rows) {
        connect(i, mesh.NodeIndex(r + 1, c), stiffness.structural,
                SpringKind::kStructural);
      }
    }
  }
  for (int r = 0; r + 1 < rows; ++r) {
    for (int c = 0; c + 1 < cols; ++c) {
      connect(mesh.NodeIndex(r, c), mesh.NodeIndex(r + 1, c + 1),
              stiffness.shear, SpringKind::kShear);
      connect(mesh.NodeIndex(r, c + 1), mesh.NodeIndex(r + 1, c),
              stiffness.shear, SpringKind::kShear);
    }
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int i = mesh.NodeIndex(r, c);
      if (c + 2 < cols) {
        connect(i, mesh.NodeIndex(r, c + 2), stiffness.bend, SpringKind::kBend);
      }
      if (r + 2 < rows) {
        connect(i, mesh.NodeIndex(r + 2, c), stiffness.bend, SpringKind::kBend);
      }
    }
  }

  mesh.pinned = {mesh.NodeIndex(0, 0), mesh.NodeIndex(0, cols - 1),
                 mesh.NodeIndex(rows - 1, 0), mesh.NodeIndex(rows - 1, cols - 1)};
  std::sort(mesh.pinned.begin(), mesh.pinned.end());
  mesh.is_pinned.assign(mesh.nodes.size(), 0);
  for (int p : mesh.pinned) mesh.is_pinned[p] = 1;

  const int mid_row = rows / 2;
  mesh.anchors[kCenterAnchor] = mesh.NodeIndex(mid_row, cols / 2);
  mesh.anchors[kLeftAnchor] = mesh.NodeIndex(mid_row, 0);
  mesh.anchors[kRightAnchor] = mesh.NodeIndex(mid_row, cols - 1);
  return mesh;
}

SpringForce ComputeSpringForce(const Spring& spring,
                               std::span<const Node> nodes) {
  const Vec3 d = nodes[spring.node_a].position - nodes[spring.node_b].position;
  const double length = d.norm();
  if (!(length > std::numeric_limits<double>::min())) {
    return {Vec3::Zero(), true};
  }
  return {-spring.stiffness * (length - spring.rest_length) / length * d, false};
}

Vec3 NetSpringForce(const TissueMesh& mesh, int node) {
  Vec3 total = Vec3::Zero();
  for (const Spring& s : mesh.springs) {
    if (s.node_a != node && s.node_b != node) continue;
    const Vec3 f = ComputeSpringForce(s, mesh.nodes).on_a;
    total += (s.node_a == node) ? f : Vec3(-f);
  }
  return total;
}

namespace {

// Net spring force on every node; returns the number of degenerate springs.
int AccumulateSpringForces(const TissueMesh& mesh, std::vector<Vec3>& forces) {
  int degenerate = 0;
  std::fill(forces.begin(), forces.end(), Vec3::Zero());
  for (const Spring& s : mesh.springs) {
    const SpringForce f = ComputeSpringForce(s, mesh.nodes);
    degenerate += f.degenerate ? 1 : 0;
    forces[s.node_a] += f.on_a;
    forces[s.node_b] -= f.on_a;
  }
  return degenerate;
}

}  // namespace

StepReport StepPhysics(TissueMesh& mesh, const PhysicsConfig& config,
                       const std::optional<Vec3>& ee_position) {
  StepReport report;
  const int substeps = config.substeps_per_control;
  const double dt = config.dt;
  const double velocity_scale = 1.0 - config.damping * dt;
  std::vector<Vec3> forces(mesh.nodes.size());

  Vec3 grasp_start = Vec3::Zero();
  Vec3 grasp_end = Vec3::Zero();
  if (mesh.grasped) {
    grasp_start = mesh.nodes[mesh.grasped->node].position;
    grasp_end = ee_position ? Vec3(*ee_position + mesh.grasped->offset)
                            : grasp_start;
  }

  for (int sub = 0; sub < substeps; ++sub) {
    int held = -1;
    if (mesh.grasped) {
      held = mesh.grasped->node;
      Node& node = mesh.nodes[held];
      const double s = static_cast<double>(sub + 1) / substeps;
      const Vec3 target = grasp_start + s * (grasp_end - grasp_start);
      node.velocity = (target - node.position) / dt;
      node.position = target;
    }

    report.degenerate_springs += AccumulateSpringForces(mesh, forces);

    if (held >= 0) {
      const double magnitude = forces[held].norm();
      report.peak_grasp_force = std::max(report.peak_grasp_force, magnitude);
      if (magnitude > config.grasp_break_force) {
        report.grasp_released = true;
        report.release_substep = sub;
        report.release_force = magnitude;
        mesh.grasped.reset();
        held = -1;
      }
    }

    for (size_t i = 0; i < mesh.nodes.size(); ++i) {
      Node& node = mesh.nodes[i];
      if (mesh.is_pinned[i]) {
        node.velocity.setZero();
        continue;
      }
      if (static_cast<int>(i) == held) continue;
      const Vec3 accel = forces[i] / node.mass + config.gravity;
      node.velocity = (node.velocity + accel * dt) * velocity_scale;
      node.position += node.velocity * dt;
    }
  }

  for (const Node& node : mesh.nodes) {
    if (!node.position.allFinite() || !node.velocity.allFinite()) {
      throw Error(ErrorCode::kSimulationDiverged,
                  "non-finite node state after physics step");
    }
  }
  return report;
}

bool TryGrasp(TissueMesh& mesh, const PhysicsConfig& config,
              const Vec3& jaw_position) {
  if (mesh.grasped) return false;
  int best = -1;
  double best_distance = std::numeric_limits<double>::infinity();
  for (int anchor : mesh.anchors) {
    const double distance = (mesh.nodes[anchor].position - jaw_position).norm();
    if (distance < best_distance) {
      best_distance = distance;
      best = anchor;
    }
  }
  if (best < 0 || best_distance > config.grasp_radius) return false;
  mesh.grasped = Grasp{best, mesh.nodes[best].position - jaw_position};
  mesh.nodes[best].velocity.setZero();
  return true;
}

void ReleaseGrasp(TissueMesh& mesh) { mesh.grasped.reset(); }

double MaxStrain(const TissueMesh& mesh) {
  double worst = 0.0;
  for (const Spring& s : mesh.springs) {
    const double length =
        (mesh.nodes[s.node_a].position - mesh.nodes[s.node_b].position).norm();
    worst = std::max(worst, std::abs(length - s.rest_length) / s.rest_length);
  }
  return worst;
}

double KineticEnergy(const TissueMesh& mesh) {
  double energy = 0.0;
  for (const Node& node : mesh.nodes) {
    energy += 0.5 * node.mass * node.velocity.squaredNorm();
  }
  return energy;
}

double SpringPotentialEnergy(const TissueMesh& mesh) {
  double energy = 0.0;
  for (const Spring& s : mesh.springs) {
    const double stretch =
        (mesh.nodes[s.node_a].position - mesh.nodes[s.node_b].position).norm() -
        s.rest_length;
    energy += 0.5 * s.stiffness * stretch * stretch;
  }
  return energy;
}

}  // namespace tissue_retract::sim
