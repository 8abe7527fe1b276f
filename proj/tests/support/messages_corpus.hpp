#pragma once

// Message corpus shared by the protocol tests and the acceptance run.

#include <vector>

#include "erupt/messages.hpp"
#include "erupt/protocol.hpp"

namespace erupt::test
{
using namespace erupt::protocol;

inline std::vector<Message> messagesOf(const std::vector<Decoded>& items)
{
  std::vector<Message> out;
  for (const auto& d : items)
  {
    if (const auto* m = std::get_if<Message>(&d))
      out.push_back(*m);
  }
  return out;
}

inline std::vector<Decoded> drain(FrameDecoder& decoder)
{
  std::vector<Decoded> out;
  while (auto d = decoder.next())
    out.push_back(std::move(*d));
  return out;
}

inline Trajectory sampleTrajectory2()
{
  Trajectory t;
  t.group = "arm";
  t.points.push_back({ 0.0, Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0) });
  t.points.push_back({ 0.75, Eigen::Vector2d(0.5, -0.25), Eigen::Vector2d(1.0, -0.5) });
  t.points.push_back({ 1.5, Eigen::Vector2d(1.0, -0.5), Eigen::Vector2d(0, 0) });
  return t;
}

/// One message of every type, with non-trivial bodies.
inline std::vector<Message> everyType()
{
  std::vector<Message> out;
  out.push_back(makeHello("ui"));
  out.push_back(makeServerHello("erupt", 12, 1));
  out.push_back(makeSnapshotRequest(2));
  out.push_back(makeSnapshotRequest(3, 7));

  SceneState state;
  state.version = 4;
  CollisionObject box{ "box", Shape::box({ 0.1, 0.2, 0.3 }), Pose(Eigen::Vector3d(1, 2, 3)), 3 };
  state.objects["box"] = box;
  state.robot_state = JointState("arm", Eigen::Vector2d(0.1, -0.2));
  out.push_back(makeSnapshot(state, 2));

  SceneOpRequest add;
  add.kind = SceneOpRequest::Kind::Add;
  add.object = CollisionObject{ "ball", Shape::sphere(0.25), Pose(Eigen::Vector3d(0.5, 0, 0.1)), 0 };
  add.id = "ball";
  out.push_back(makeSceneOp(add, 5));
  SceneOpRequest set_pose;
  set_pose.kind = SceneOpRequest::Kind::SetPose;
  set_pose.id = "ball";
  set_pose.pose = Pose(Eigen::Vector3d(0.1, 0.2, 0.3),
                       Eigen::Quaterniond(Eigen::AngleAxisd(0.4, Eigen::Vector3d::UnitZ())));
  out.push_back(makeSceneOp(set_pose));
  SceneOpRequest resize;
  resize.kind = SceneOpRequest::Kind::Resize;
  resize.id = "ball";
  resize.shape = Shape::capsule(0.1, 0.3);
  out.push_back(makeSceneOp(resize));
  SceneOpRequest remove;
  remove.kind = SceneOpRequest::Kind::Remove;
  remove.id = "ball";
  out.push_back(makeSceneOp(remove, 6));

  SceneDiff diff;
  diff.from_version = 4;
  diff.to_version = 6;
  diff.ops.push_back(SceneOp::add(box));
  diff.ops.push_back(SceneOp::setPose("box", Pose(Eigen::Vector3d(0, 0, 1)), 6));
  diff.ops.push_back(SceneOp::remove("ball"));
  diff.robot_state = JointState("arm", Eigen::Vector2d(1, 2));
  out.push_back(makeSceneDiff(diff));

  out.push_back(makeRobotState(JointState("arm", Eigen::Vector2d(0.3, 0.4))));
  out.push_back(makeRobotState(JointState("arm", Eigen::Vector2d(0.3, 0.4)), 9));
  out.push_back(makePlannersRequest(7));
  out.push_back(makePlanners(plannerIds(), 7));

  MotionPlanRequest req;
  req.group = "arm";
  req.start = JointState("arm", Eigen::Vector2d(0, 0));
  req.goal = JointState("arm", Eigen::Vector2d(1, -0.5));
  req.planner_id = std::string(kPrm);
  req.seed = 42;
  out.push_back(makePlanRequest(req, 8));
  PoseGoal pg;
  pg.pose = Pose(Eigen::Vector3d(0.5, 0.2, 0.4));
  pg.position_only = true;
  req.goal = pg;
  out.push_back(makePlanRequest(req, 9));

  MotionPlanResponse resp;
  resp.status = PlanStatus::Success;
  resp.planning_time = 0.125;
  resp.path = std::vector<JointState>{ JointState("arm", Eigen::Vector2d(0, 0)),
                                       JointState("arm", Eigen::Vector2d(1, -0.5)) };
  resp.trajectory = sampleTrajectory2();
  resp.waypoint_count = 3;
  out.push_back(makePlanResponse(resp, "traj-1", 8));
  MotionPlanResponse failed;
  failed.status = PlanStatus::InvalidStartState;
  failed.message = "start state in collision: link2 vs ball";
  out.push_back(makePlanResponse(failed, std::nullopt, 9));

  out.push_back(makeExecuteRequest({ "traj-1", std::nullopt }, 10));
  out.push_back(makeExecuteRequest({ std::nullopt, sampleTrajectory2() }, 11));
  out.push_back(makeExecuteStatus({ "traj-1", ExecuteState::Executing, 0.5 }, 10));
  out.push_back(makeExecuteStop(12));
  out.push_back(makeMirrorSet(true, 13));

  IkRequest ik;
  ik.group = "arm";
  ik.target = Pose(Eigen::Vector3d(1.0, 0.5, 0.0));
  ik.seed = JointState("arm", Eigen::Vector2d(0.1, 0.1));
  out.push_back(makeIkRequest(ik, 14));
  IkResult ik_result;
  ik_result.status = IkStatus::Success;
  ik_result.state = JointState("arm", Eigen::Vector2d(0.2, 0.7));
  ik_result.position_residual = 3e-6;
  ik_result.iterations = 11;
  out.push_back(makeIkResponse(ik_result, 14));

  out.push_back(makeWarning("MirrorActive", "robot_state ignored while mirroring", 15));
  out.push_back(makeError(ErrorCode::UnknownPlanner, "unknown planner 'foo'", 16));
  out.push_back(makeError(ErrorCode::MalformedJson, "bad frame"));
  return out;
}

}  // namespace erupt::test
