#pragma once

#include <optional>
#include <string>

#include "erupt/json_codec.hpp"
#include "erupt/kinematics.hpp"
#include "erupt/protocol.hpp"

// Typed bodies for the protocol messages. make* build a Message, decode*
// read a body and throw Error(InvalidMessage) on schema violations.
namespace erupt::protocol
{
Message makeHello(const std::string& client_name, int protocol_version = kProtocolVersion);
Message makeServerHello(const std::string& server_name, std::uint64_t scene_version, std::optional<std::int64_t> id);

struct Hello
{
  std::string client_name;
  int protocol_version = 0;
};
Hello decodeHello(const Json& body);

struct SceneOpRequest
{
  enum class Kind
  {
    Add,
    SetPose,
    Resize,
    Remove,
  };
  Kind kind = Kind::Add;
  CollisionObject object;  // Add
  std::string id;          // all but Add
  Pose pose;               // SetPose
  Shape shape;             // Resize

  bool operator==(const SceneOpRequest& other) const = default;
};
Message makeSceneOp(const SceneOpRequest& op, std::optional<std::int64_t> id = std::nullopt);
SceneOpRequest decodeSceneOpRequest(const Json& body);

Message makeSnapshotRequest(std::int64_t id, std::optional<std::uint64_t> since = std::nullopt);
std::optional<std::uint64_t> decodeSnapshotSince(const Json& body);
Message makeSnapshot(const SceneState& state, std::optional<std::int64_t> id);
Message makeSceneDiff(const SceneDiff& diff, std::optional<std::int64_t> id = std::nullopt);

/// Robot state as published by the server carries the scene version it
/// produced; client updates leave it out.
struct RobotStateUpdateMsg
{
  JointState state;
  std::optional<std::uint64_t> version;
};
Message makeRobotState(const JointState& state, std::optional<std::uint64_t> version = std::nullopt);
RobotStateUpdateMsg decodeRobotState(const Json& body);

Message makePlannersRequest(std::int64_t id);
Message makePlanners(const std::vector<std::string>& ids, std::int64_t id);

Message makePlanRequest(const MotionPlanRequest& request, std::int64_t id);
/// `trajectory_id` names the stored trajectory for execute_request.
Message makePlanResponse(const MotionPlanResponse& response, std::optional<std::string> trajectory_id,
                         std::optional<std::int64_t> id);

struct ExecuteRequest
{
  std::optional<std::string> trajectory_id;
  std::optional<Trajectory> trajectory;
};
Message makeExecuteRequest(const ExecuteRequest& request, std::int64_t id);
ExecuteRequest decodeExecuteRequest(const Json& body);

enum class ExecuteState
{
  Accepted,
  Executing,
  Done,
  Aborted,
};
std::string_view executeStateName(ExecuteState state);
struct ExecuteStatus
{
  std::string trajectory_id;
  ExecuteState state = ExecuteState::Accepted;
  double progress = 0.0;
};
Message makeExecuteStatus(const ExecuteStatus& status, std::optional<std::int64_t> id);
ExecuteStatus decodeExecuteStatus(const Json& body);
Message makeExecuteStop(std::int64_t id);

Message makeMirrorSet(bool enabled, std::optional<std::int64_t> id);
bool decodeMirrorSet(const Json& body);

struct IkRequest
{
  std::string group = "default";
  Pose target;
  std::optional<JointState> seed;
  bool position_only = false;
};
Message makeIkRequest(const IkRequest& request, std::int64_t id);
IkRequest decodeIkRequest(const Json& body);
Message makeIkResponse(const IkResult& result, std::int64_t id);
IkResult decodeIkResponse(const Json& body);

Message makeError(ErrorCode code, const std::string& text, std::optional<std::int64_t> id = std::nullopt);
Message makeWarning(const std::string& code, const std::string& text, std::optional<std::int64_t> id = std::nullopt);

struct ErrorBody
{
  std::string code;
  std::string human_text;
  std::optional<std::int64_t> id;
};
ErrorBody decodeError(const Json& body);

}  // namespace erupt::protocol
