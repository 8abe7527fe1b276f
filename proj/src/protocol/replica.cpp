#include "erupt/replica.hpp"

#include "erupt/json_codec.hpp"
#include "erupt/messages.hpp"

namespace erupt::protocol
{
SceneReplica::Outcome SceneReplica::apply(const Message& message)
{
  if (message.type == type::kSnapshot)
  {
    SceneState snap = json::decodeSnapshot(message.body);
    if (synced_ && snap.version < state_.version)
      return Outcome::Ignored;
    state_ = std::move(snap);
    synced_ = true;
    return Outcome::Applied;
  }
  if (!synced_)
    return Outcome::Ignored;
  if (message.type == type::kSceneDiff)
  {
    const SceneDiff diff = json::decodeSceneDiff(message.body);
    if (diff.to_version <= state_.version && diff.from_version <= state_.version)
      return diff.from_version == state_.version ? Outcome::Applied : Outcome::Ignored;
    if (diff.from_version != state_.version)
      return Outcome::NeedsResync;
    applyDiff(state_, diff);
    return Outcome::Applied;
  }
  if (message.type == type::kRobotState)
  {
    const RobotStateUpdateMsg update = decodeRobotState(message.body);
    if (!update.version)
      return Outcome::Ignored;
    if (*update.version <= state_.version)
      return Outcome::Ignored;
    if (*update.version != state_.version + 1)
      return Outcome::NeedsResync;
    state_.robot_state = update.state;
    state_.version = *update.version;
    return Outcome::Applied;
  }
  return Outcome::Ignored;
}

}  // namespace erupt::protocol
