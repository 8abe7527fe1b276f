#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "erupt/collision_object.hpp"
#include "erupt/joint_state.hpp"
#include "erupt/robot_model.hpp"

namespace erupt
{
struct SceneOp
{
  enum class Kind
  {
    Add,
    SetPose,
    Remove,
  };

  Kind kind = Kind::Add;
  std::string id;
  CollisionObject object;     // Add
  Pose pose;                  // SetPose
  std::uint64_t revision = 0;  // SetPose

  static SceneOp add(const CollisionObject& object);
  static SceneOp setPose(const std::string& id, const Pose& pose, std::uint64_t revision);
  static SceneOp remove(const std::string& id);

  bool operator==(const SceneOp& other) const = default;
};

std::string_view sceneOpKindName(SceneOp::Kind kind);
SceneOp::Kind sceneOpKindFromName(std::string_view name);

/// Net change between two scene versions. `robot_state` is present when the
/// robot state changed in that range.
struct SceneDiff
{
  std::uint64_t from_version = 0;
  std::uint64_t to_version = 0;
  std::vector<SceneOp> ops;
  std::optional<JointState> robot_state;

  bool empty() const
  {
    return ops.empty() && !robot_state;
  }
  bool operator==(const SceneDiff& other) const = default;
};

/// Plain scene contents. Also serves as the snapshot type and as a client
/// replica that follows the server through diffs.
struct SceneState
{
  std::uint64_t version = 0;
  std::map<std::string, CollisionObject> objects;
  std::optional<JointState> robot_state;

  std::vector<CollisionObject> objectList() const;
  bool operator==(const SceneState& other) const = default;
};

/// Applies `diff` to a replica at diff.from_version. Throws
/// Error(InvalidArgument) on a version gap and UnknownId / DuplicateId when
/// an op does not fit the replica.
void applyDiff(SceneState& replica, const SceneDiff& diff);

struct RobotStateUpdate
{
  std::uint64_t version = 0;
  bool clamped = false;
};

/// Authoritative scene with a bounded change journal. Not thread safe; the
/// server serializes access.
class PlanningScene
{
public:
  static constexpr std::size_t kDefaultRetention = 10000;

  explicit PlanningScene(std::shared_ptr<const RobotModel> model = nullptr,
                         std::size_t retention = kDefaultRetention);

  std::uint64_t version() const
  {
    return state_.version;
  }
  const SceneState& state() const
  {
    return state_;
  }
  const std::map<std::string, CollisionObject>& objects() const
  {
    return state_.objects;
  }
  const CollisionObject* find(const std::string& id) const;
  const std::optional<JointState>& robotState() const
  {
    return state_.robot_state;
  }
  const std::shared_ptr<const RobotModel>& model() const
  {
    return model_;
  }

  std::uint64_t addObject(CollisionObject object);
  std::uint64_t setPose(const std::string& id, const Pose& pose);
  std::uint64_t resizeObject(const std::string& id, const Shape& shape);
  std::uint64_t removeObject(const std::string& id);
  /// Clamps into joint limits when a model is attached; `clamped` reports
  /// whether that changed anything.
  RobotStateUpdate setRobotState(const JointState& q);

  /// Coalesced diff from `since` to now. Throws VersionEvicted when `since`
  /// predates the retained journal, InvalidArgument when it is in the future.
  SceneDiff journalSince(std::uint64_t since) const;
  SceneState snapshot() const
  {
    return state_;
  }
  /// Oldest version journalSince still accepts.
  std::uint64_t oldestRetainedVersion() const
  {
    return evicted_through_;
  }

private:
  enum class EntryKind
  {
    Add,
    SetPose,
    Remove,
    Robot,
  };
  struct Entry
  {
    std::uint64_t version;
    EntryKind kind;
    std::string id;
  };

  CollisionObject& require(const std::string& id);
  void record(EntryKind kind, const std::string& id);

  std::shared_ptr<const RobotModel> model_;
  std::size_t retention_;
  SceneState state_;
  std::deque<Entry> journal_;
  std::uint64_t evicted_through_ = 0;
};

}  // namespace erupt
