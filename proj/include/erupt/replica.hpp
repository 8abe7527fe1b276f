#pragma once

#include "erupt/planning_scene.hpp"
#include "erupt/protocol.hpp"

namespace erupt::protocol
{
/// Client-side copy of the server scene, fed with snapshot, scene_diff and
/// robot_state messages in arrival order.
class SceneReplica
{
public:
  enum class Outcome
  {
    Applied,
    /// Stale, duplicate, or not a scene message.
    Ignored,
    /// A version gap; request snapshot_request{since: version()}.
    NeedsResync,
  };

  Outcome apply(const Message& message);

  bool synced() const
  {
    return synced_;
  }
  std::uint64_t version() const
  {
    return state_.version;
  }
  const SceneState& state() const
  {
    return state_;
  }

private:
  SceneState state_;
  bool synced_ = false;
};

}  // namespace erupt::protocol
