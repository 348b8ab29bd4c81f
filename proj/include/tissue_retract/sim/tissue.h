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

#ifndef TISSUE_RETRACT_SIM_TISSUE_H_
#define TISSUE_RETRACT_SIM_TISSUE_H_

// Mass-spring soft tissue: a rectangular sheet of point masses joined by
// Hookean springs, pinned at its four corners, with three anchor nodes the
// gripper can attach to.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "tissue_retract/common/types.h"

namespace tissue_retract::sim {

enum class SpringKind { kStructural, kShear, kBend };

struct Node {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double mass = 0.0;
};

struct Spring {
  int node_a = 0;
  int node_b = 0;
  double rest_length = 0.0;
  double stiffness = 0.0;
  SpringKind kind = SpringKind::kStructural;
};

// Kinematic attachment of one node to the gripper jaw.
struct Grasp {
  int node = -1;
  Vec3 offset = Vec3::Zero();  // node position minus jaw position at grasp
};

enum AnchorSite { kCenterAnchor = 0, kLeftAnchor = 1, kRightAnchor = 2 };

struct TissueMesh {
  int rows = 0;
  int cols = 0;
  std::vector<Node> nodes;
  std::vector<Spring> springs;
  std::vector<int> pinned;           // sorted node indices
  std::vector<char> is_pinned;       // per-node lookup for `pinned`
  std::array<int, 3> anchors{};      // indexed by AnchorSite
  std::optional<Grasp> grasped;

  int NodeIndex(int row, int col) const { return row * cols + col; }
  const Vec3& Position(int node) const { return nodes[node].position; }

  // Rigidly shifts every node; rest lengths are unaffected.
  void Translate(const Vec3& offset);
};

struct StiffnessSet {
  double structural = 80.0;  // N/m
  double shear = 40.0;
  double bend = 20.0;
};

struct PhysicsConfig {
  double dt = 1.0 / 240.0;
  int substeps_per_control = 24;
  Vec3 gravity = Vec3(0.0, 0.0, -1.0);
  double damping = 4.0;  // 1/s
  double grasp_radius = 0.01;
  double grasp_break_force = 2.5;

  // Throws invalid-argument when a field is out of range.
  void Validate() const;
};

// Builds a rows x cols grid centered on `center` in the z = center.z plane,
// with rows along y and columns along x. Every spring starts at its rest
// length. Throws invalid-argument for rows or cols below 3 and for
// non-positive spacing, mass, or stiffness.
TissueMesh BuildTissue(int rows, int cols, double spacing, double node_mass,
                       const StiffnessSet& stiffness,
                       const Vec3& center = Vec3::Zero());

struct SpringForce {
  Vec3 on_a = Vec3::Zero();  // the force on node_b is -on_a
  bool degenerate = false;   // coincident endpoints; force reported as zero
};

SpringForce ComputeSpringForce(const Spring& spring,
                               std::span<const Node> nodes);

// Sum of spring forces acting on `node` (gravity excluded).
Vec3 NetSpringForce(const TissueMesh& mesh, int node);

struct StepReport {
  bool grasp_released = false;  // break-force release, never a commanded one
  int release_substep = -1;
  double release_force = 0.0;
  double peak_grasp_force = 0.0;
  int degenerate_springs = 0;
};

// Advances one control period (config.substeps_per_control sub-steps) with
// semi-implicit Euler. When a node is grasped and `ee_position` is given, the
// node is moved linearly from where it is now to ee_position + offset across
// the sub-steps. The grasp breaks at the first sub-step whose net spring
// force on the grasped node exceeds config.grasp_break_force. Throws
// simulation-diverged if any position becomes non-finite.
StepReport StepPhysics(TissueMesh& mesh, const PhysicsConfig& config,
                       const std::optional<Vec3>& ee_position);

// Attaches the anchor nearest to `jaw_position` when it lies within
// config.grasp_radius. Returns false (and leaves the mesh untouched) on a miss
// or when a node is already grasped.
bool TryGrasp(TissueMesh& mesh, const PhysicsConfig& config,
              const Vec3& jaw_position);

void ReleaseGrasp(TissueMesh& mesh);

// max over springs of |length - rest| / rest.
double MaxStrain(const TissueMesh& mesh);

double KineticEnergy(const TissueMesh& mesh);
double SpringPotentialEnergy(const TissueMesh& mesh);

}  // namespace tissue_retract::sim

#endif  // TISSUE_RETRACT_SIM_TISSUE_H_
