#include "erupt/planning_scene.hpp"

#include <algorithm>
#include <unordered_map>

#include "erupt/error.hpp"

namespace erupt
{
SceneOp SceneOp::add(const CollisionObject& object)
{
  SceneOp op;
  op.kind = Kind::Add;
  op.id = object.id;
  op.object = object;
  return op;
}

SceneOp SceneOp::setPose(const std::string& id, const Pose& pose, std::uint64_t revision)
{
  SceneOp op;
  op.kind = Kind::SetPose;
  op.id = id;
  op.pose = pose;
  op.revision = revision;
  return op;
}

SceneOp SceneOp::remove(const std::string& id)
{
  SceneOp op;
  op.kind = Kind::Remove;
  op.id = id;
  return op;
}

std::string_view sceneOpKindName(SceneOp::Kind kind)
{
  switch (kind)
  {
    case SceneOp::Kind::Add:
      return "add";
    case SceneOp::Kind::SetPose:
      return "set_pose";
    case SceneOp::Kind::Remove:
      return "remove";
  }
  return "add";
}

SceneOp::Kind sceneOpKindFromName(std::string_view name)
{
  if (name == "add")
    return SceneOp::Kind::Add;
  if (name == "set_pose")
    return SceneOp::Kind::SetPose;
  if (name == "remove")
    return SceneOp::Kind::Remove;
  throw Error(ErrorCode::InvalidMessage, "unknown scene op '" + std::string(name) + "'");
}

std::vector<CollisionObject> SceneState::objectList() const
{
  std::vector<CollisionObject> out;
  out.reserve(objects.size());
  for (const auto& [id, object] : objects)
    out.push_back(object);
  return out;
}

void applyDiff(SceneState& replica, const SceneDiff& diff)
{
  if (diff.from_version != replica.version)
    throw Error(ErrorCode::InvalidArgument, "diff starts at version " + std::to_string(diff.from_version) +
                                                " but replica is at " + std::to_string(replica.version));
  for (const SceneOp& op : diff.ops)
  {
    switch (op.kind)
    {
      case SceneOp::Kind::Add:
        if (!replica.objects.emplace(op.id, op.object).second)
          throw Error(ErrorCode::DuplicateId, "replica already has '" + op.id + "'");
        break;
      case SceneOp::Kind::SetPose: {
        auto it = replica.objects.find(op.id);
        if (it == replica.objects.end())
          throw Error(ErrorCode::UnknownId, "replica has no '" + op.id + "'");
        it->second.pose = op.pose;
        it->second.revision = op.revision;
        break;
      }
      case SceneOp::Kind::Remove:
        if (replica.objects.erase(op.id) == 0)
          throw Error(ErrorCode::UnknownId, "replica has no '" + op.id + "'");
        break;
    }
  }
  if (diff.robot_state)
    replica.robot_state = diff.robot_state;
  replica.version = diff.to_version;
}

PlanningScene::PlanningScene(std::shared_ptr<const RobotModel> model, std::size_t retention)
  : model_(std::move(model)), retention_(retention == 0 ? 1 : retention)
{
}

const CollisionObject* PlanningScene::find(const std::string& id) const
{
  auto it = state_.objects.find(id);
  return it == state_.objects.end() ? nullptr : &it->second;
}

CollisionObject& PlanningScene::require(const std::string& id)
{
  auto it = state_.objects.find(id);
  if (it == state_.objects.end())
    throw Error(ErrorCode::UnknownId, "no object '" + id + "'");
  return it->second;
}

void PlanningScene::record(EntryKind kind, const std::string& id)
{
  journal_.push_back(Entry{ state_.version, kind, id });
  while (journal_.size() > retention_)
  {
    evicted_through_ = journal_.front().version;
    journal_.pop_front();
  }
}

std::uint64_t PlanningScene::addObject(CollisionObject object)
{
  if (object.id.empty())
    throw Error(ErrorCode::InvalidArgument, "object id must not be empty");
  object.shape.validate();
  if (state_.objects.count(object.id))
    throw Error(ErrorCode::DuplicateId, "object '" + object.id + "' already exists");
  ++state_.version;
  object.revision = state_.version;
  const std::string id = object.id;
  state_.objects.emplace(id, std::move(object));
  record(EntryKind::Add, id);
  return state_.version;
}

std::uint64_t PlanningScene::setPose(const std::string& id, const Pose& pose)
{
  CollisionObject& object = require(id);
  ++state_.version;
  object.pose = pose;
  object.revision = state_.version;
  record(EntryKind::SetPose, id);
  return state_.version;
}

std::uint64_t PlanningScene::resizeObject(const std::string& id, const Shape& shape)
{
  CollisionObject& object = require(id);
  shape.validate();
  ++state_.version;
  object.shape = shape;
  object.revision = state_.version;
  record(EntryKind::Remove, id);
  record(EntryKind::Add, id);
  return state_.version;
}

std::uint64_t PlanningScene::removeObject(const std::string& id)
{
  require(id);
  ++state_.version;
  state_.objects.erase(id);
  record(EntryKind::Remove, id);
  return state_.version;
}

RobotStateUpdate PlanningScene::setRobotState(const JointState& q)
{
  RobotStateUpdate update;
  JointState stored = q;
  if (model_)
  {
    stored = clampToLimits(*model_, q.group, q);
    update.clamped = !(stored.positions == q.positions);
  }
  ++state_.version;
  state_.robot_state = std::move(stored);
  record(EntryKind::Robot, {});
  update.version = state_.version;
  return update;
}

SceneDiff PlanningScene::journalSince(std::uint64_t since) const
{
  if (since > state_.version)
    throw Error(ErrorCode::InvalidArgument, "version " + std::to_string(since) + " is ahead of the scene (" +
                                                std::to_string(state_.version) + ")");
  if (since < evicted_through_)
    throw Error(ErrorCode::VersionEvicted, "version " + std::to_string(since) + " is no longer in the journal");

  SceneDiff diff;
  diff.from_version = since;
  diff.to_version = state_.version;

  struct Track
  {
    bool present_at_since;
    bool removed;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Track> touched;
  bool robot_changed = false;

  // Entries are in version order; skip everything at or before `since`.
  auto it = std::upper_bound(journal_.begin(), journal_.end(), since,
                             [](std::uint64_t v, const Entry& e) { return v < e.version; });
  for (; it != journal_.end(); ++it)
  {
    if (it->kind == EntryKind::Robot)
    {
      robot_changed = true;
      continue;
    }
    auto [slot, inserted] = touched.try_emplace(it->id, Track{ it->kind != EntryKind::Add, false });
    if (inserted)
      order.push_back(it->id);
    if (it->kind == EntryKind::Remove)
      slot->second.removed = true;
  }

  for (const std::string& id : order)
  {
    const Track& t = touched.at(id);
    const CollisionObject* now = find(id);
    if (!t.present_at_since)
    {
      if (now)
        diff.ops.push_back(SceneOp::add(*now));
    }
    else if (!now)
    {
      diff.ops.push_back(SceneOp::remove(id));
    }
    else if (t.removed)
    {
      diff.ops.push_back(SceneOp::remove(id));
      diff.ops.push_back(SceneOp::add(*now));
    }
    else
    {
      diff.ops.push_back(SceneOp::setPose(id, now->pose, now->revision));
    }
  }
  if (robot_changed)
    diff.robot_state = state_.robot_state;
  return diff;
}

}  // namespace erupt
