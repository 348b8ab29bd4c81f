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

#include "tissue_retract/env/json_io.h"

#include "tissue_retract/common/error.h"
#include "tissue_retract/common/hash.h"

namespace tissue_retract {

nlohmann::json Vec3ToJson(const Vec3& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

Vec3 Vec3FromJson(const nlohmann::json& j) {
  Require(j.is_array() && j.size() == 3, ErrorCode::kParseError,
          "expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace tissue_retract

namespace tissue_retract::env {

using nlohmann::json;

void to_json(json& j, const Observation& obs) {
  j = json{{"ee_position", Vec3ToJson(obs.ee_position)},
           {"gripper", obs.gripper},
           {"anchor_position", Vec3ToJson(obs.anchor_position)},
           {"rel_anchor", Vec3ToJson(obs.rel_anchor)},
           {"desired_goal", Vec3ToJson(obs.desired_goal)},
           {"achieved_goal", Vec3ToJson(obs.achieved_goal)},
           {"grasp_flag", obs.grasp_flag}};
}

void from_json(const json& j, Observation& obs) {
  obs.ee_position = Vec3FromJson(j.at("ee_position"));
  obs.gripper = j.at("gripper").get<double>();
  obs.anchor_position = Vec3FromJson(j.at("anchor_position"));
  obs.rel_anchor = Vec3FromJson(j.at("rel_anchor"));
  obs.desired_goal = Vec3FromJson(j.at("desired_goal"));
  obs.achieved_goal = Vec3FromJson(j.at("achieved_goal"));
  obs.grasp_flag = j.at("grasp_flag").get<double>();
}

void to_json(json& j, const Action& action) {
  j = json{{"delta", Vec3ToJson(action.delta)}, {"grip_cmd", action.grip_cmd}};
}

void from_json(const json& j, Action& action) {
  action.delta = Vec3FromJson(j.at("delta"));
  action.grip_cmd = j.at("grip_cmd").get<double>();
}

void to_json(json& j, const StepInfo& info) {
  j = json{{"success", info.success},
           {"grip_lost", info.grip_lost},
           {"max_strain", info.max_strain}};
}

void from_json(const json& j, StepInfo& info) {
  info.success = j.at("success").get<bool>();
  info.grip_lost = j.at("grip_lost").get<bool>();
  info.max_strain = j.at("max_strain").get<double>();
}

void to_json(json& j, const Transition& tr) {
  j = json{{"obs", tr.obs},   {"action", tr.action},
           {"reward", tr.reward}, {"next_obs", tr.next_obs},
           {"done", tr.done}, {"info", tr.info}};
}

void from_json(const json& j, Transition& tr) {
  tr.obs = j.at("obs").get<Observation>();
  tr.action = j.at("action").get<Action>();
  tr.reward = j.at("reward").get<double>();
  tr.next_obs = j.at("next_obs").get<Observation>();
  tr.done = j.at("done").get<bool>();
  tr.info = j.at("info").get<StepInfo>();
}

void to_json(json& j, const TaskSpec& task) {
  j = json{{"task_id", std::string(TaskName(task.task_id))},
           {"success_tolerance", task.success_tolerance},
           {"retract_height", task.retract_height},
           {"workspace",
            {task.workspace.x_min, task.workspace.x_max, task.workspace.y_min,
             task.workspace.y_max}},
           {"target_region_lo", Vec3ToJson(task.target_region.lo)},
           {"target_region_hi", Vec3ToJson(task.target_region.hi)}};
}

void from_json(const json& j, TaskSpec& task) {
  task.task_id = ParseTaskId(j.at("task_id").get<std::string>());
  task.success_tolerance = j.at("success_tolerance").get<double>();
  task.retract_height = j.at("retract_height").get<double>();
  const json& ws = j.at("workspace");
  task.workspace = {ws.at(0).get<double>(), ws.at(1).get<double>(),
                    ws.at(2).get<double>(), ws.at(3).get<double>()};
  task.target_region.lo = Vec3FromJson(j.at("target_region_lo"));
  task.target_region.hi = Vec3FromJson(j.at("target_region_hi"));
}

namespace {

json ArmToJson(const kinematics::ArmModel& arm) {
  json rows = json::array();
  for (int i = 0; i < kinematics::kNumJoints; ++i) {
    const auto& r = arm.dh_rows[i];
    const auto& lim = arm.joint_limits[i];
    rows.push_back(
        {{"a", r.a},
         {"alpha", r.alpha},
         {"d", r.d},
         {"theta_offset", r.theta_offset},
         {"type", r.type == kinematics::JointType::kPrismatic ? "prismatic"
                                                               : "revolute"},
         {"unit_scale", r.unit_scale},
         {"lo", lim.lo},
         {"hi", lim.hi}});
  }
  return rows;
}

void ArmFromJson(const json& rows, kinematics::ArmModel& arm) {
  Require(rows.is_array() && rows.size() == kinematics::kNumJoints,
          ErrorCode::kParseError, "arm needs exactly 6 DH rows");
  for (int i = 0; i < kinematics::kNumJoints; ++i) {
    const json& r = rows[i];
    auto& row = arm.dh_rows[i];
    row.a = r.at("a").get<double>();
    row.alpha = r.at("alpha").get<double>();
    row.d = r.at("d").get<double>();
    row.theta_offset = r.at("theta_offset").get<double>();
    row.type = r.at("type").get<std::string>() == "prismatic"
                   ? kinematics::JointType::kPrismatic
                   : kinematics::JointType::kRevolute;
    row.unit_scale = r.value("unit_scale", 1.0);
    arm.joint_limits[i] = {r.at("lo").get<double>(), r.at("hi").get<double>()};
  }
}

}  // namespace

void to_json(json& j, const EnvConfig& c) {
  json home = json::array();
  for (int i = 0; i < kinematics::kNumJoints; ++i) home.push_back(c.home[i]);
  j = json{
      {"task", c.task},
      {"physics",
       {{"dt", c.physics.dt},
        {"substeps_per_control", c.physics.substeps_per_control},
        {"gravity", Vec3ToJson(c.physics.gravity)},
        {"damping", c.physics.damping},
        {"grasp_radius", c.physics.grasp_radius},
        {"grasp_break_force", c.physics.grasp_break_force}}},
      {"tissue",
       {{"rows", c.tissue.rows},
        {"cols", c.tissue.cols},
        {"spacing", c.tissue.spacing},
        {"node_mass", c.tissue.node_mass},
        {"k_structural", c.tissue.stiffness.structural},
        {"k_shear", c.tissue.stiffness.shear},
        {"k_bend", c.tissue.stiffness.bend},
        {"settle_steps", c.tissue.settle_steps}}},
      {"arm", ArmToJson(c.arm)},
      {"home", home},
      {"ik",
       {{"damping", c.ik.damping},
        {"tolerance", c.ik.tolerance},
        {"max_iters", c.ik.max_iters}}},
      {"base_offset", Vec3ToJson(c.base_offset)},
      {"max_step", c.max_step},
      {"horizon", c.horizon},
      {"ee_bounds_lo", Vec3ToJson(c.ee_bounds.lo)},
      {"ee_bounds_hi", Vec3ToJson(c.ee_bounds.hi)},
      {"max_reset_retries", c.max_reset_retries}};
}

void from_json(const json& j, EnvConfig& c) {
  c.task = j.at("task").get<TaskSpec>();
  const json& p = j.at("physics");
  c.physics.dt = p.at("dt").get<double>();
  c.physics.substeps_per_control = p.at("substeps_per_control").get<int>();
  c.physics.gravity = Vec3FromJson(p.at("gravity"));
  c.physics.damping = p.at("damping").get<double>();
  c.physics.grasp_radius = p.at("grasp_radius").get<double>();
  c.physics.grasp_break_force = p.at("grasp_break_force").get<double>();
  const json& t = j.at("tissue");
  c.tissue.rows = t.at("rows").get<int>();
  c.tissue.cols = t.at("cols").get<int>();
  c.tissue.spacing = t.at("spacing").get<double>();
  c.tissue.node_mass = t.at("node_mass").get<double>();
  c.tissue.stiffness.structural = t.at("k_structural").get<double>();
  c.tissue.stiffness.shear = t.at("k_shear").get<double>();
  c.tissue.stiffness.bend = t.at("k_bend").get<double>();
  c.tissue.settle_steps = t.at("settle_steps").get<int>();
  ArmFromJson(j.at("arm"), c.arm);
  const json& home = j.at("home");
  Require(home.is_array() && home.size() == kinematics::kNumJoints,
          ErrorCode::kParseError, "home needs 6 joint values");
  for (int i = 0; i < kinematics::kNumJoints; ++i) {
    c.home[i] = home[i].get<double>();
  }
  const json& ik = j.at("ik");
  c.ik.damping = ik.at("damping").get<double>();
  c.ik.tolerance = ik.at("tolerance").get<double>();
  c.ik.max_iters = ik.at("max_iters").get<int>();
  c.base_offset = Vec3FromJson(j.at("base_offset"));
  c.max_step = j.at("max_step").get<double>();
  c.horizon = j.at("horizon").get<int>();
  c.ee_bounds.lo = Vec3FromJson(j.at("ee_bounds_lo"));
  c.ee_bounds.hi = Vec3FromJson(j.at("ee_bounds_hi"));
  c.max_reset_retries = j.at("max_reset_retries").get<int>();
}

std::string ConfigHash(const EnvConfig& config) {
  return Sha256Hex(json(config).dump()).substr(0, 16);
}

}  // namespace tissue_retract::env
