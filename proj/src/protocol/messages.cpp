#include "erupt/messages.hpp"

namespace erupt::protocol
{
namespace
{
[[noreturn]] void bad(const std::string& what)
{
  throw Error(ErrorCode::InvalidMessage, what);
}

const Json& need(const Json& body, const char* name)
{
  auto it = body.find(name);
  if (it == body.end() || it->is_null())
    bad(std::string("missing field '") + name + "'");
  return *it;
}

const Json* maybe(const Json& body, const char* name)
{
  auto it = body.find(name);
  return it == body.end() || it->is_null() ? nullptr : &*it;
}

std::string needString(const Json& body, const char* name)
{
  const Json& v = need(body, name);
  if (!v.is_string())
    bad(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

Message message(std::string_view type, Json body, std::optional<std::int64_t> id = std::nullopt)
{
  Message m;
  m.type = std::string(type);
  m.id = id;
  m.body = std::move(body);
  return m;
}
}  // namespace

Message makeHello(const std::string& client_name, int protocol_version)
{
  return message(type::kHello, Json{ { "client_name", client_name }, { "protocol_version", protocol_version } });
}

Message makeServerHello(const std::string& server_name, std::uint64_t scene_version, std::optional<std::int64_t> id)
{
  return message(type::kHello,
                 Json{ { "server_name", server_name },
                       { "protocol_version", kProtocolVersion },
                       { "scene_version", scene_version } },
                 id);
}

Hello decodeHello(const Json& body)
{
  Hello h;
  h.client_name = needString(body, "client_name");
  const Json& v = need(body, "protocol_version");
  if (!v.is_number_integer())
    bad("protocol_version must be an integer");
  h.protocol_version = v.get<int>();
  return h;
}

Message makeSceneOp(const SceneOpRequest& op, std::optional<std::int64_t> id)
{
  Json body;
  switch (op.kind)
  {
    case SceneOpRequest::Kind::Add:
      body = Json{ { "op", "add" }, { "object", json::encode(op.object, false) } };
      break;
    case SceneOpRequest::Kind::SetPose:
      body = Json{ { "op", "set_pose" }, { "id", op.id }, { "pose", json::encode(op.pose) } };
      break;
    case SceneOpRequest::Kind::Resize:
      body = Json{ { "op", "resize" }, { "id", op.id }, { "shape", json::encode(op.shape) } };
      break;
    case SceneOpRequest::Kind::Remove:
      body = Json{ { "op", "remove" }, { "id", op.id } };
      break;
  }
  return message(type::kSceneOp, std::move(body), id);
}

SceneOpRequest decodeSceneOpRequest(const Json& body)
{
  SceneOpRequest op;
  const std::string kind = needString(body, "op");
  if (kind == "add")
  {
    op.kind = SceneOpRequest::Kind::Add;
    op.object = json::decodeObject(need(body, "object"));
    op.object.revision = 0;
    op.id = op.object.id;
  }
  else if (kind == "set_pose")
  {
    op.kind = SceneOpRequest::Kind::SetPose;
    op.id = needString(body, "id");
    op.pose = json::decodePose(need(body, "pose"));
  }
  else if (kind == "resize")
  {
    op.kind = SceneOpRequest::Kind::Resize;
    op.id = needString(body, "id");
    op.shape = json::decodeShape(need(body, "shape"));
  }
  else if (kind == "remove")
  {
    op.kind = SceneOpRequest::Kind::Remove;
    op.id = needString(body, "id");
  }
  else
  {
    bad("unknown scene op '" + kind + "'");
  }
  return op;
}

Message makeSnapshotRequest(std::int64_t id, std::optional<std::uint64_t> since)
{
  Json body = Json::object();
  if (since)
    body["since"] = *since;
  return message(type::kSnapshotRequest, std::move(body), id);
}

std::optional<std::uint64_t> decodeSnapshotSince(const Json& body)
{
  const Json* since = maybe(body, "since");
  if (!since)
    return std::nullopt;
  if (!since->is_number_unsigned() && !(since->is_number_integer() && since->get<std::int64_t>() >= 0))
    bad("'since' must be a nonnegative integer");
  return since->get<std::uint64_t>();
}

Message makeSnapshot(const SceneState& state, std::optional<std::int64_t> id)
{
  return message(type::kSnapshot, json::encode(state), id);
}

Message makeSceneDiff(const SceneDiff& diff, std::optional<std::int64_t> id)
{
  return message(type::kSceneDiff, json::encode(diff), id);
}

Message makeRobotState(const JointState& state, std::optional<std::uint64_t> version)
{
  Json body = json::encode(state);
  if (version)
    body["version"] = *version;
  return message(type::kRobotState, std::move(body));
}

RobotStateUpdateMsg decodeRobotState(const Json& body)
{
  RobotStateUpdateMsg m;
  m.state = json::decodeJointState(body);
  if (const Json* v = maybe(body, "version"))
  {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0))
      bad("'version' must be a nonnegative integer");
    m.version = v->get<std::uint64_t>();
  }
  return m;
}

Message makePlannersRequest(std::int64_t id)
{
  return message(type::kPlannersRequest, Json::object(), id);
}

Message makePlanners(const std::vector<std::string>& ids, std::int64_t id)
{
  return message(type::kPlanners, Json{ { "planner_ids", ids } }, id);
}

Message makePlanRequest(const MotionPlanRequest& request, std::int64_t id)
{
  return message(type::kPlanRequest, json::encode(request), id);
}

Message makePlanResponse(const MotionPlanResponse& response, std::optional<std::string> trajectory_id,
                         std::optional<std::int64_t> id)
{
  Json body = json::encode(response);
  if (trajectory_id)
    body["trajectory_id"] = *trajectory_id;
  return message(type::kPlanResponse, std::move(body), id);
}

Message makeExecuteRequest(const ExecuteRequest& request, std::int64_t id)
{
  Json body = Json::object();
  if (request.trajectory_id)
    body["trajectory_id"] = *request.trajectory_id;
  if (request.trajectory)
    body["trajectory"] = json::encode(*request.trajectory);
  return message(type::kExecuteRequest, std::move(body), id);
}

ExecuteRequest decodeExecuteRequest(const Json& body)
{
  ExecuteRequest r;
  if (maybe(body, "trajectory_id"))
    r.trajectory_id = needString(body, "trajectory_id");
  if (const Json* t = maybe(body, "trajectory"))
    r.trajectory = json::decodeTrajectory(*t);
  if (!r.trajectory_id && !r.trajectory)
    bad("execute_request needs 'trajectory_id' or 'trajectory'");
  return r;
}

std::string_view executeStateName(ExecuteState state)
{
  switch (state)
  {
    case ExecuteState::Accepted:
      return "accepted";
    case ExecuteState::Executing:
      return "executing";
    case ExecuteState::Done:
      return "done";
    case ExecuteState::Aborted:
      return "aborted";
  }
  return "aborted";
}

Message makeExecuteStatus(const ExecuteStatus& status, std::optional<std::int64_t> id)
{
  return message(type::kExecuteStatus,
                 Json{ { "trajectory_id", status.trajectory_id },
                       { "status", std::string(executeStateName(status.state)) },
                       { "progress", status.progress } },
                 id);
}

ExecuteStatus decodeExecuteStatus(const Json& body)
{
  ExecuteStatus s;
  s.trajectory_id = needString(body, "trajectory_id");
  const std::string state = needString(body, "status");
  bool known = false;
  for (ExecuteState e : { ExecuteState::Accepted, ExecuteState::Executing, ExecuteState::Done, ExecuteState::Aborted })
  {
    if (executeStateName(e) == state)
    {
      s.state = e;
      known = true;
    }
  }
  if (!known)
    bad("unknown execute status '" + state + "'");
  const Json& p = need(body, "progress");
  if (!p.is_number())
    bad("'progress' must be a number");
  s.progress = p.get<double>();
  return s;
}

Message makeExecuteStop(std::int64_t id)
{
  return message(type::kExecuteStop, Json::object(), id);
}

Message makeMirrorSet(bool enabled, std::optional<std::int64_t> id)
{
  return message(type::kMirrorSet, Json{ { "enabled", enabled } }, id);
}

bool decodeMirrorSet(const Json& body)
{
  const Json& v = need(body, "enabled");
  if (!v.is_boolean())
    bad("'enabled' must be a boolean");
  return v.get<bool>();
}

Message makeIkRequest(const IkRequest& request, std::int64_t id)
{
  Json body{ { "group", request.group }, { "target", json::encode(request.target) } };
  if (request.seed)
    body["seed_state"] = json::encode(*request.seed);
  body["position_only"] = request.position_only;
  return message(type::kIkRequest, std::move(body), id);
}

IkRequest decodeIkRequest(const Json& body)
{
  IkRequest r;
  if (maybe(body, "group"))
    r.group = needString(body, "group");
  r.target = json::decodePose(need(body, "target"));
  if (const Json* s = maybe(body, "seed_state"))
    r.seed = json::decodeJointState(*s);
  if (const Json* p = maybe(body, "position_only"))
  {
    if (!p->is_boolean())
      bad("'position_only' must be a boolean");
    r.position_only = p->get<bool>();
  }
  return r;
}

Message makeIkResponse(const IkResult& result, std::int64_t id)
{
  return message(type::kIkResponse,
                 Json{ { "status", std::string(ikStatusName(result.status)) },
                       { "state", json::encode(result.state) },
                       { "position_residual", result.position_residual },
                       { "orientation_residual", result.orientation_residual },
                       { "iterations", result.iterations } },
                 id);
}

IkResult decodeIkResponse(const Json& body)
{
  IkResult r;
  const std::string status = needString(body, "status");
  bool known = false;
  for (IkStatus s : { IkStatus::Success, IkStatus::NoConvergence, IkStatus::UnreachableHint })
  {
    if (ikStatusName(s) == status)
    {
      r.status = s;
      known = true;
    }
  }
  if (!known)
    bad("unknown IK status '" + status + "'");
  r.state = json::decodeJointState(need(body, "state"));
  r.position_residual = need(body, "position_residual").get<double>();
  r.orientation_residual = need(body, "orientation_residual").get<double>();
  r.iterations = need(body, "iterations").get<int>();
  return r;
}

Message makeError(ErrorCode code, const std::string& text, std::optional<std::int64_t> id)
{
  Json body = Json::object();
  if (id)
    body["id"] = *id;
  body["code"] = std::string(error_code_name(code));
  body["human_text"] = text;
  return message(type::kError, std::move(body), id);
}

Message makeWarning(const std::string& code, const std::string& text, std::optional<std::int64_t> id)
{
  Json body = Json::object();
  if (id)
    body["id"] = *id;
  body["code"] = code;
  body["human_text"] = text;
  return message(type::kWarning, std::move(body), id);
}

ErrorBody decodeError(const Json& body)
{
  ErrorBody e;
  e.code = needString(body, "code");
  e.human_text = needString(body, "human_text");
  if (const Json* id = maybe(body, "id"))
    e.id = id->get<std::int64_t>();
  return e;
}

}  // namespace erupt::protocol
