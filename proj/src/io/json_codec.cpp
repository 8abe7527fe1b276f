#include "erupt/json_codec.hpp"

#include <fstream>
#include <sstream>

#include "erupt/error.hpp"

namespace erupt::json
{
namespace
{
[[noreturn]] void bad(const std::string& what)
{
  throw Error(ErrorCode::InvalidMessage, what);
}

const Json& field(const Json& j, const char* name)
{
  if (!j.is_object())
    bad(std::string("expected an object holding '") + name + "'");
  auto it = j.find(name);
  if (it == j.end())
    bad(std::string("missing field '") + name + "'");
  return *it;
}

const Json* optionalField(const Json& j, const char* name)
{
  auto it = j.find(name);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double number(const Json& j, const char* name)
{
  const Json& v = field(j, name);
  if (!v.is_number())
    bad(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

std::string text(const Json& j, const char* name)
{
  const Json& v = field(j, name);
  if (!v.is_string())
    bad(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

std::int64_t integer(const Json& j, const char* name)
{
  const Json& v = field(j, name);
  if (!v.is_number_integer())
    bad(std::string("field '") + name + "' must be an integer");
  return v.get<std::int64_t>();
}

std::uint64_t unsignedInteger(const Json& j, const char* name)
{
  const Json& v = field(j, name);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    bad(std::string("field '") + name + "' must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

bool boolean(const Json& j, const char* name)
{
  const Json& v = field(j, name);
  if (!v.is_boolean())
    bad(std::string("field '") + name + "' must be a boolean");
  return v.get<bool>();
}

const Json& array(const Json& j, const char* name)
{
  const Json& v = field(j, name);
  if (!v.is_array())
    bad(std::string("field '") + name + "' must be an array");
  return v;
}
}  // namespace

Json encode(const Eigen::VectorXd& v)
{
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(v[i]);
  return out;
}

Eigen::VectorXd decodeVector(const Json& j, const std::string& what)
{
  if (!j.is_array())
    bad(what + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
  {
    if (!j[i].is_number())
      bad(what + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json encode(const Pose& pose)
{
  const Eigen::Quaterniond& q = pose.orientation;
  return Json{ { "position", { pose.position.x(), pose.position.y(), pose.position.z() } },
               { "orientation", { q.w(), q.x(), q.y(), q.z() } } };
}

Pose decodePose(const Json& j)
{
  const Eigen::VectorXd p = decodeVector(field(j, "position"), "position");
  const Eigen::VectorXd q = decodeVector(field(j, "orientation"), "orientation");
  if (p.size() != 3)
    bad("position must have 3 entries");
  if (q.size() != 4)
    bad("orientation must have 4 entries (w, x, y, z)");
  const Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
  if (!(quat.norm() > 1e-9))
    bad("orientation must be a nonzero quaternion");
  Pose pose;
  pose.position = p;
  // Keep an exactly normalized input bit-for-bit.
  pose.orientation = std::abs(quat.squaredNorm() - 1.0) <= 1e-15 ? quat : quat.normalized();
  return pose;
}

Json encode(const Shape& shape)
{
  Json out{ { "kind", std::string(shapeKindName(shape.kind)) } };
  switch (shape.kind)
  {
    case ShapeKind::Box:
      out["half_extents"] = { shape.half_extents.x(), shape.half_extents.y(), shape.half_extents.z() };
      break;
    case ShapeKind::Sphere:
      out["radius"] = shape.radius;
      break;
    case ShapeKind::Cylinder:
    case ShapeKind::Capsule:
      out["radius"] = shape.radius;
      out["half_length"] = shape.half_length;
      break;
  }
  return out;
}

Shape decodeShape(const Json& j)
{
  Shape s;
  try
  {
    s.kind = shapeKindFromName(text(j, "kind"));
  }
  catch (const Error&)
  {
    bad("unknown shape kind '" + text(j, "kind") + "'");
  }
  switch (s.kind)
  {
    case ShapeKind::Box: {
      const Eigen::VectorXd h = decodeVector(field(j, "half_extents"), "half_extents");
      if (h.size() != 3)
        bad("half_extents must have 3 entries");
      s.half_extents = h;
      break;
    }
    case ShapeKind::Sphere:
      s.radius = number(j, "radius");
      break;
    case ShapeKind::Cylinder:
    case ShapeKind::Capsule:
      s.radius = number(j, "radius");
      s.half_length = number(j, "half_length");
      break;
  }
  return s;
}

Json encode(const CollisionObject& object, bool with_revision)
{
  Json out{ { "id", object.id }, { "shape", encode(object.shape) }, { "pose", encode(object.pose) } };
  if (with_revision)
    out["revision"] = object.revision;
  return out;
}

CollisionObject decodeObject(const Json& j)
{
  CollisionObject o;
  o.id = text(j, "id");
  o.shape = decodeShape(field(j, "shape"));
  o.pose = decodePose(field(j, "pose"));
  if (optionalField(j, "revision"))
    o.revision = unsignedInteger(j, "revision");
  return o;
}

Json encode(const JointState& state)
{
  return Json{ { "group", state.group }, { "positions", encode(state.positions) } };
}

JointState decodeJointState(const Json& j)
{
  return JointState(text(j, "group"), decodeVector(field(j, "positions"), "positions"));
}

Json encode(const SceneOp& op)
{
  Json out{ { "op", std::string(sceneOpKindName(op.kind)) } };
  switch (op.kind)
  {
    case SceneOp::Kind::Add:
      out["object"] = encode(op.object);
      break;
    case SceneOp::Kind::SetPose:
      out["id"] = op.id;
      out["pose"] = encode(op.pose);
      out["revision"] = op.revision;
      break;
    case SceneOp::Kind::Remove:
      out["id"] = op.id;
      break;
  }
  return out;
}

SceneOp decodeSceneOp(const Json& j)
{
  switch (sceneOpKindFromName(text(j, "op")))
  {
    case SceneOp::Kind::Add:
      return SceneOp::add(decodeObject(field(j, "object")));
    case SceneOp::Kind::SetPose:
      return SceneOp::setPose(text(j, "id"), decodePose(field(j, "pose")), unsignedInteger(j, "revision"));
    case SceneOp::Kind::Remove:
      return SceneOp::remove(text(j, "id"));
  }
  bad("unknown scene op");
}

Json encode(const SceneDiff& diff)
{
  Json ops = Json::array();
  for (const auto& op : diff.ops)
    ops.push_back(encode(op));
  Json out{ { "from_version", diff.from_version }, { "to_version", diff.to_version }, { "ops", std::move(ops) } };
  if (diff.robot_state)
    out["robot_state"] = encode(*diff.robot_state);
  return out;
}

SceneDiff decodeSceneDiff(const Json& j)
{
  SceneDiff d;
  d.from_version = unsignedInteger(j, "from_version");
  d.to_version = unsignedInteger(j, "to_version");
  for (const auto& op : array(j, "ops"))
    d.ops.push_back(decodeSceneOp(op));
  if (const Json* rs = optionalField(j, "robot_state"))
    d.robot_state = decodeJointState(*rs);
  return d;
}

Json encode(const SceneState& snapshot)
{
  Json objects = Json::array();
  for (const auto& [id, object] : snapshot.objects)
    objects.push_back(encode(object));
  Json out{ { "version", snapshot.version }, { "objects", std::move(objects) } };
  if (snapshot.robot_state)
    out["robot_state"] = encode(*snapshot.robot_state);
  return out;
}

SceneState decodeSnapshot(const Json& j)
{
  SceneState s;
  s.version = unsignedInteger(j, "version");
  for (const auto& o : array(j, "objects"))
  {
    CollisionObject object = decodeObject(o);
    const std::string id = object.id;
    if (!s.objects.emplace(id, std::move(object)).second)
      bad("duplicate object id '" + id + "' in snapshot");
  }
  if (const Json* rs = optionalField(j, "robot_state"))
    s.robot_state = decodeJointState(*rs);
  return s;
}

Json encode(const Trajectory& trajectory)
{
  Json points = Json::array();
  for (const auto& p : trajectory.points)
    points.push_back(Json{ { "time_from_start", p.time_from_start },
                           { "positions", encode(p.positions) },
                           { "velocities", encode(p.velocities) } });
  return Json{ { "group", trajectory.group }, { "points", std::move(points) } };
}

Trajectory decodeTrajectory(const Json& j)
{
  Trajectory t;
  t.group = text(j, "group");
  for (const auto& p : array(j, "points"))
  {
    TrajectoryPoint point;
    point.time_from_start = number(p, "time_from_start");
    point.positions = decodeVector(field(p, "positions"), "positions");
    point.velocities = decodeVector(field(p, "velocities"), "velocities");
    if (point.positions.size() != point.velocities.size())
      bad("trajectory point positions and velocities differ in length");
    t.points.push_back(std::move(point));
  }
  return t;
}

Json encode(const PoseGoal& goal)
{
  return Json{ { "pose", encode(goal.pose) },
               { "position_tolerance", goal.position_tolerance },
               { "orientation_tolerance", goal.orientation_tolerance },
               { "position_only", goal.position_only } };
}

Json encode(const MotionPlanRequest& request)
{
  Json goal;
  if (const auto* js = std::get_if<JointState>(&request.goal))
    goal = Json{ { "joint_state", encode(*js) } };
  else
    goal = encode(std::get<PoseGoal>(request.goal));
  Json out{ { "group", request.group },
            { "start", encode(request.start) },
            { "goal", std::move(goal) },
            { "planner_id", request.planner_id },
            { "num_attempts", request.num_attempts },
            { "max_planning_time", request.max_planning_time },
            { "edge_step", request.edge_step },
            { "shortcut_iterations", request.shortcut_iterations } };
  if (request.seed)
    out["seed"] = *request.seed;
  return out;
}

MotionPlanRequest decodePlanRequest(const Json& j)
{
  MotionPlanRequest r;
  if (optionalField(j, "group"))
    r.group = text(j, "group");
  r.start = decodeJointState(field(j, "start"));
  const Json& goal = field(j, "goal");
  if (optionalField(goal, "joint_state"))
  {
    r.goal = decodeJointState(field(goal, "joint_state"));
  }
  else if (optionalField(goal, "pose"))
  {
    PoseGoal pg;
    pg.pose = decodePose(field(goal, "pose"));
    if (optionalField(goal, "position_tolerance"))
      pg.position_tolerance = number(goal, "position_tolerance");
    if (optionalField(goal, "orientation_tolerance"))
      pg.orientation_tolerance = number(goal, "orientation_tolerance");
    if (optionalField(goal, "position_only"))
      pg.position_only = boolean(goal, "position_only");
    r.goal = pg;
  }
  else
  {
    bad("goal needs either 'joint_state' or 'pose'");
  }
  if (optionalField(j, "planner_id"))
    r.planner_id = text(j, "planner_id");
  if (optionalField(j, "num_attempts"))
    r.num_attempts = static_cast<int>(integer(j, "num_attempts"));
  if (optionalField(j, "max_planning_time"))
    r.max_planning_time = number(j, "max_planning_time");
  if (optionalField(j, "edge_step"))
    r.edge_step = number(j, "edge_step");
  if (optionalField(j, "shortcut_iterations"))
    r.shortcut_iterations = static_cast<int>(integer(j, "shortcut_iterations"));
  if (optionalField(j, "seed"))
    r.seed = unsignedInteger(j, "seed");
  return r;
}

Json encode(const MotionPlanResponse& response)
{
  Json out{ { "status", std::string(planStatusName(response.status)) },
            { "planning_time", response.planning_time },
            { "waypoint_count", response.waypoint_count } };
  if (!response.message.empty())
    out["message"] = response.message;
  if (response.path)
  {
    Json path = Json::array();
    for (const auto& q : *response.path)
      path.push_back(encode(q));
    out["path"] = std::move(path);
  }
  if (response.trajectory)
    out["trajectory"] = encode(*response.trajectory);
  return out;
}

MotionPlanResponse decodePlanResponse(const Json& j)
{
  MotionPlanResponse r;
  try
  {
    r.status = planStatusFromName(text(j, "status"));
  }
  catch (const Error&)
  {
    bad("unknown plan status '" + text(j, "status") + "'");
  }
  r.planning_time = number(j, "planning_time");
  r.waypoint_count = unsignedInteger(j, "waypoint_count");
  if (optionalField(j, "message"))
    r.message = text(j, "message");
  if (optionalField(j, "path"))
  {
    std::vector<JointState> path;
    for (const auto& q : array(j, "path"))
      path.push_back(decodeJointState(q));
    r.path = std::move(path);
  }
  if (const Json* t = optionalField(j, "trajectory"))
    r.trajectory = decodeTrajectory(*t);
  return r;
}

SceneDocument parseSceneDocument(const std::string& input)
{
  Json j;
  try
  {
    j = Json::parse(input);
  }
  catch (const nlohmann::json::exception& e)
  {
    throw Error(ErrorCode::MalformedJson, std::string("scene file is not valid JSON: ") + e.what());
  }
  SceneDocument doc;
  for (const auto& o : array(j, "objects"))
  {
    CollisionObject object = decodeObject(o);
    object.revision = 0;
    doc.objects.push_back(std::move(object));
  }
  if (const Json* rs = optionalField(j, "robot_state"))
    doc.robot_state = decodeJointState(*rs);
  return doc;
}

std::string writeSceneDocument(const SceneDocument& doc)
{
  Json objects = Json::array();
  for (const auto& o : doc.objects)
    objects.push_back(encode(o, false));
  Json out{ { "objects", std::move(objects) } };
  if (doc.robot_state)
    out["robot_state"] = encode(*doc.robot_state);
  return out.dump(2) + "\n";
}

SceneDocument loadSceneFile(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open scene file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parseSceneDocument(ss.str());
}

void saveSceneFile(const std::string& path, const SceneDocument& doc)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::Io, "cannot write scene file '" + path + "'");
  out << writeSceneDocument(doc);
  if (!out)
    throw Error(ErrorCode::Io, "failed writing scene file '" + path + "'");
}

SceneDocument sceneDocument(const SceneState& state)
{
  SceneDocument doc;
  doc.objects = state.objectList();
  doc.robot_state = state.robot_state;
  return doc;
}

}  // namespace erupt::json
