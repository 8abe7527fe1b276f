#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "erupt/json_codec.hpp"
#include "erupt/messages.hpp"
#include "erupt/planning_scene.hpp"
#include "erupt/server/executor.hpp"
#include "erupt/server/peer.hpp"

namespace erupt::server
{
using SessionId = std::uint64_t;

/// Random restarts for ik_request, which serves interactive dragging.
inline constexpr int kDragIkRestarts = 3;

struct ServerConfig
{
  std::shared_ptr<const RobotModel> model;
  /// Initial objects and robot state.
  json::SceneDocument scene;
  std::size_t plan_workers = 2;
  std::size_t journal_retention = PlanningScene::kDefaultRetention;
  /// Fixes every stochastic seed (plan requests without a seed, IK restarts).
  std::optional<std::uint64_t> seed;
  double playback_rate = 1.0;
  double publish_hz = 50.0;
  /// Recording replayed while mirroring; empty means no external source.
  std::string mirror_file;
  std::string server_name = "erupt";
  /// Stored trajectories kept for execute_request by id.
  std::size_t trajectory_store = 256;
};

/// Transport-independent server: sessions, the authoritative scene, the
/// planning pool, the executor and the mirror source. handle() is called
/// by each connection's reader, one message at a time per session.
class ServerCore
{
public:
  /// Custom executor/source replace the mock ones (null keeps the default).
  explicit ServerCore(ServerConfig config, std::unique_ptr<TrajectoryExecutor> executor = nullptr,
                      std::unique_ptr<JointStateSource> mirror_source = nullptr);
  ~ServerCore();
  ServerCore(const ServerCore&) = delete;
  ServerCore& operator=(const ServerCore&) = delete;

  SessionId connect(std::shared_ptr<Peer> peer);
  void disconnect(SessionId session);
  void handle(SessionId session, const protocol::Decoded& item);

  /// Closes every session with an error frame and stops all background work.
  void shutdown(const std::string& reason = "server shutting down");

  SceneState sceneSnapshot() const;
  std::uint64_t sceneVersion() const;
  bool mirrorEnabled() const;
  bool executing() const;
  std::size_t sessionCount() const;
  const RobotModel& model() const
  {
    return *config_.model;
  }

private:
  struct Session
  {
    std::shared_ptr<Peer> peer;
    std::string client_name;
    bool greeted = false;
    std::uint64_t last_acked_version = 0;
  };

  struct Execution
  {
    SessionId session = 0;
    std::optional<std::int64_t> request_id;
    std::string trajectory_id;
  };

  class PlanPool;

  using Message = protocol::Message;

  void onMessage(SessionId session, const Message& m);
  void onHello(SessionId session, const Message& m);
  void onSnapshotRequest(SessionId session, const Message& m);
  void onSceneOp(SessionId session, const Message& m);
  void onRobotState(SessionId session, const Message& m);
  void onPlanRequest(SessionId session, const Message& m);
  void onExecuteRequest(SessionId session, const Message& m);
  void onExecuteStop(SessionId session, const Message& m);
  void onMirrorSet(SessionId session, const Message& m);
  void onIkRequest(SessionId session, const Message& m);

  /// Sends to one session; drops it when its queue overflowed. Caller holds mutex_.
  void sendLocked(SessionId session, const Message& m);
  void send(SessionId session, const Message& m);
  /// Sends to every greeted session. Caller holds mutex_.
  void broadcastLocked(const Message& m, std::optional<SessionId> origin = std::nullopt,
                       std::optional<std::int64_t> origin_id = std::nullopt);
  void replyError(SessionId session, ErrorCode code, const std::string& text, std::optional<std::int64_t> id);
  void closeSession(SessionId session, const Message& last);

  /// Single serialized robot-state write path; returns whether it clamped.
  bool applyRobotState(const JointState& state, std::optional<SessionId> origin = std::nullopt);
  std::string storeTrajectory(const Trajectory& trajectory);
  std::uint64_t nextSeed();

  ServerConfig config_;
  std::unique_ptr<TrajectoryExecutor> executor_;
  std::unique_ptr<JointStateSource> mirror_source_;

  mutable std::mutex mutex_;
  PlanningScene scene_;
  std::map<SessionId, Session> sessions_;
  SessionId next_session_ = 1;
  bool mirror_enabled_ = false;
  bool shutting_down_ = false;
  std::optional<Execution> execution_;
  std::map<std::string, Trajectory> trajectories_;
  std::deque<std::string> trajectory_order_;
  std::uint64_t next_trajectory_ = 1;
  std::uint64_t seed_counter_ = 0;

  /// Serializes executor/mirror start and stop, which must not run under mutex_.
  std::mutex control_mutex_;
  std::unique_ptr<PlanPool> pool_;
};

}  // namespace erupt::server
