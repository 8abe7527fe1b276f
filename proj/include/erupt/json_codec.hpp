#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "erupt/collision_object.hpp"
#include "erupt/joint_state.hpp"
#include "erupt/motion_plan.hpp"
#include "erupt/planning_scene.hpp"
#include "erupt/pose.hpp"
#include "erupt/shapes.hpp"
#include "erupt/trajectory.hpp"

// JSON forms of the domain types. Field order is fixed, so serialization is
// canonical. Decoders throw Error(InvalidMessage) naming the offending field.
namespace erupt::json
{
using Json = nlohmann::ordered_json;

Json encode(const Eigen::VectorXd& v);
Json encode(const Pose& pose);
Json encode(const Shape& shape);
/// `with_revision` is false for the versionless scene file.
Json encode(const CollisionObject& object, bool with_revision = true);
Json encode(const JointState& state);
Json encode(const SceneOp& op);
Json encode(const SceneDiff& diff);
Json encode(const SceneState& snapshot);
Json encode(const Trajectory& trajectory);
Json encode(const PoseGoal& goal);
Json encode(const MotionPlanRequest& request);
Json encode(const MotionPlanResponse& response);

Eigen::VectorXd decodeVector(const Json& j, const std::string& what);
Pose decodePose(const Json& j);
/// Structural decode only; dimensions are not validated here.
Shape decodeShape(const Json& j);
CollisionObject decodeObject(const Json& j);
JointState decodeJointState(const Json& j);
SceneOp decodeSceneOp(const Json& j);
SceneDiff decodeSceneDiff(const Json& j);
SceneState decodeSnapshot(const Json& j);
Trajectory decodeTrajectory(const Json& j);
MotionPlanRequest decodePlanRequest(const Json& j);
MotionPlanResponse decodePlanResponse(const Json& j);

/// Contents of a scene file: objects plus optional robot state, no version.
struct SceneDocument
{
  std::vector<CollisionObject> objects;
  std::optional<JointState> robot_state;
};

SceneDocument parseSceneDocument(const std::string& text);  // Error(MalformedJson / InvalidMessage)
std::string writeSceneDocument(const SceneDocument& doc);
SceneDocument loadSceneFile(const std::string& path);  // also Error(Io)
void saveSceneFile(const std::string& path, const SceneDocument& doc);
SceneDocument sceneDocument(const SceneState& state);

}  // namespace erupt::json
