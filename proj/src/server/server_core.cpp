#include "erupt/server/server_core.hpp"

#include <random>

#include <spdlog/spdlog.h>

#include "erupt/kinematics.hpp"
#include "erupt/motion_plan.hpp"

namespace erupt::server
{
namespace type = protocol::type;

class ServerCore::PlanPool
{
public:
  using Job = std::function<void(std::stop_token)>;

  explicit PlanPool(std::size_t workers)
  {
    for (std::size_t i = 0; i < std::max<std::size_t>(1, workers); ++i)
      threads_.emplace_back([this](std::stop_token stop) { run(stop); });
  }

  ~PlanPool()
  {
    stop();
  }

  void submit(Job job)
  {
    {
      std::lock_guard lock(mutex_);
      jobs_.push_back(std::move(job));
    }
    cv_.notify_one();
  }

  void stop()
  {
    for (auto& t : threads_)
      t.request_stop();
    cv_.notify_all();
    for (auto& t : threads_)
    {
      if (t.joinable())
        t.join();
    }
  }

private:
  void run(std::stop_token stop)
  {
    while (true)
    {
      Job job;
      {
        std::unique_lock lock(mutex_);
        if (!cv_.wait(lock, stop, [this] { return !jobs_.empty(); }))
          return;
        job = std::move(jobs_.front());
        jobs_.pop_front();
      }
      job(stop);
    }
  }

  std::mutex mutex_;
  std::condition_variable_any cv_;
  std::deque<Job> jobs_;
  std::vector<std::jthread> threads_;
};

ServerCore::ServerCore(ServerConfig config, std::unique_ptr<TrajectoryExecutor> executor,
                       std::unique_ptr<JointStateSource> mirror_source)
  : config_(std::move(config))
  , executor_(std::move(executor))
  , mirror_source_(std::move(mirror_source))
  , scene_(config_.model, config_.journal_retention)
{
  if (!config_.model)
    throw Error(ErrorCode::InvalidArgument, "server needs a robot model");
  for (const auto& object : config_.scene.objects)
    scene_.addObject(object);
  if (config_.scene.robot_state)
    scene_.setRobotState(*config_.scene.robot_state);
  else
    scene_.setRobotState(JointState(config_.model->defaultGroupName(),
                                    Eigen::VectorXd::Zero(config_.model->dimension(config_.model->defaultGroupName()))));
  if (!executor_)
  {
    const std::string& group = config_.model->defaultGroupName();
    executor_ = std::make_unique<MockExecutor>(continuousMask(*config_.model, group), config_.playback_rate,
                                               config_.publish_hz);
  }
  if (!mirror_source_ && !config_.mirror_file.empty())
    mirror_source_ = std::make_unique<FileReplaySource>(config_.mirror_file, config_.playback_rate);
  pool_ = std::make_unique<PlanPool>(config_.plan_workers);
}

ServerCore::~ServerCore()
{
  shutdown();
}

SessionId ServerCore::connect(std::shared_ptr<Peer> peer)
{
  std::lock_guard lock(mutex_);
  const SessionId id = next_session_++;
  if (shutting_down_)
  {
    peer->closeAfter(protocol::makeError(ErrorCode::ShuttingDown, "server shutting down"));
    return id;
  }
  sessions_[id] = Session{ std::move(peer), {}, false, 0 };
  return id;
}

void ServerCore::disconnect(SessionId session)
{
  bool owned_execution = false;
  {
    std::lock_guard lock(mutex_);
    if (sessions_.erase(session) == 0)
      return;
    owned_execution = execution_ && execution_->session == session;
  }
  spdlog::debug("session {} disconnected", session);
  if (owned_execution)
  {
    std::lock_guard control(control_mutex_);
    executor_->stop();
  }
}

void ServerCore::shutdown(const std::string& reason)
{
  {
    std::lock_guard lock(mutex_);
    if (shutting_down_)
      return;
    shutting_down_ = true;
    for (auto& [id, s] : sessions_)
      s.peer->closeAfter(protocol::makeError(ErrorCode::ShuttingDown, reason));
    sessions_.clear();
  }
  pool_->stop();
  std::lock_guard control(control_mutex_);
  executor_->stop();
  if (mirror_source_)
    mirror_source_->stop();
}

SceneState ServerCore::sceneSnapshot() const
{
  std::lock_guard lock(mutex_);
  return scene_.snapshot();
}

std::uint64_t ServerCore::sceneVersion() const
{
  std::lock_guard lock(mutex_);
  return scene_.version();
}

bool ServerCore::mirrorEnabled() const
{
  std::lock_guard lock(mutex_);
  return mirror_enabled_;
}

bool ServerCore::executing() const
{
  return executor_->busy();
}

std::size_t ServerCore::sessionCount() const
{
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

void ServerCore::sendLocked(SessionId session, const Message& m)
{
  auto it = sessions_.find(session);
  if (it == sessions_.end())
    return;
  if (!it->second.peer->deliver(m) && it->second.peer->overflowed())
  {
    spdlog::warn("session {} dropped: outbound queue overflow", session);
    sessions_.erase(it);
  }
}

void ServerCore::send(SessionId session, const Message& m)
{
  std::lock_guard lock(mutex_);
  sendLocked(session, m);
}

void ServerCore::broadcastLocked(const Message& m, std::optional<SessionId> origin,
                                 std::optional<std::int64_t> origin_id)
{
  std::vector<SessionId> targets;
  for (auto& [id, s] : sessions_)
  {
    if (s.greeted)
    {
      targets.push_back(id);
      s.last_acked_version = scene_.version();
    }
  }
  for (SessionId id : targets)
  {
    Message copy = m;
    copy.id = origin && *origin == id ? origin_id : std::nullopt;
    sendLocked(id, copy);
  }
}

void ServerCore::replyError(SessionId session, ErrorCode code, const std::string& text,
                            std::optional<std::int64_t> id)
{
  send(session, protocol::makeError(code, text, id));
}

void ServerCore::closeSession(SessionId session, const Message& last)
{
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session);
  if (it == sessions_.end())
    return;
  it->second.peer->closeAfter(last);
  sessions_.erase(it);
}

void ServerCore::handle(SessionId session, const protocol::Decoded& item)
{
  if (const auto* err = std::get_if<protocol::DecodeError>(&item))
  {
    if (err->fatal)
      closeSession(session, protocol::makeError(err->code, err->text, err->id));
    else
      replyError(session, err->code, err->text, err->id);
    return;
  }
  const Message& m = std::get<Message>(item);
  try
  {
    onMessage(session, m);
  }
  catch (const Error& e)
  {
    replyError(session, e.code(), e.what(), m.id);
  }
  catch (const std::exception& e)
  {
    replyError(session, ErrorCode::InvalidMessage, e.what(), m.id);
  }
}

void ServerCore::onMessage(SessionId session, const Message& m)
{
  if (!protocol::isKnownType(m.type))
    throw Error(ErrorCode::UnknownType, "unknown message type '" + m.type + "'");
  if (m.type == type::kHello)
    return onHello(session, m);
  {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(session);
    if (it == sessions_.end())
      return;
    if (!it->second.greeted)
      throw Error(ErrorCode::NotReady, "send hello first");
  }
  if (m.type == type::kSnapshotRequest)
    return onSnapshotRequest(session, m);
  if (m.type == type::kSceneOp)
    return onSceneOp(session, m);
  if (m.type == type::kRobotState)
    return onRobotState(session, m);
  if (m.type == type::kPlannersRequest)
  {
    Message reply = protocol::makePlanners(plannerIds(), 0);
    reply.id = m.id;
    return send(session, reply);
  }
  if (m.type == type::kPlanRequest)
    return onPlanRequest(session, m);
  if (m.type == type::kExecuteRequest)
    return onExecuteRequest(session, m);
  if (m.type == type::kExecuteStop)
    return onExecuteStop(session, m);
  if (m.type == type::kMirrorSet)
    return onMirrorSet(session, m);
  if (m.type == type::kIkRequest)
    return onIkRequest(session, m);
  throw Error(ErrorCode::InvalidMessage, "'" + m.type + "' is not a client-to-server message");
}

void ServerCore::onHello(SessionId session, const Message& m)
{
  const protocol::Hello hello = protocol::decodeHello(m.body);
  if (hello.protocol_version != protocol::kProtocolVersion)
  {
    closeSession(session, protocol::makeError(ErrorCode::ProtocolVersion,
                                              "unsupported protocol_version " + std::to_string(hello.protocol_version) +
                                                  "; this server speaks " +
                                                  std::to_string(protocol::kProtocolVersion),
                                              m.id));
    return;
  }
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session);
  if (it == sessions_.end())
    return;
  if (it->second.greeted)
    throw Error(ErrorCode::InvalidMessage, "duplicate hello");
  it->second.greeted = true;
  it->second.client_name = hello.client_name;
  it->second.last_acked_version = scene_.version();
  spdlog::info("session {} is '{}'", session, hello.client_name);
  sendLocked(session, protocol::makeServerHello(config_.server_name, scene_.version(), m.id));
}

void ServerCore::onSnapshotRequest(SessionId session, const Message& m)
{
  const auto since = protocol::decodeSnapshotSince(m.body);
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session);
  if (it == sessions_.end())
    return;
  it->second.last_acked_version = scene_.version();
  if (since)
  {
    try
    {
      sendLocked(session, protocol::makeSceneDiff(scene_.journalSince(*since), m.id));
      return;
    }
    catch (const Error& e)
    {
      if (e.code() != ErrorCode::VersionEvicted)
        throw;
    }
  }
  sendLocked(session, protocol::makeSnapshot(scene_.snapshot(), m.id));
}

void ServerCore::onSceneOp(SessionId session, const Message& m)
{
  const protocol::SceneOpRequest op = protocol::decodeSceneOpRequest(m.body);
  std::lock_guard lock(mutex_);
  const std::uint64_t before = scene_.version();
  switch (op.kind)
  {
    case protocol::SceneOpRequest::Kind::Add:
      scene_.addObject(op.object);
      break;
    case protocol::SceneOpRequest::Kind::SetPose:
      scene_.setPose(op.id, op.pose);
      break;
    case protocol::SceneOpRequest::Kind::Resize:
      scene_.resizeObject(op.id, op.shape);
      break;
    case protocol::SceneOpRequest::Kind::Remove:
      scene_.removeObject(op.id);
      break;
  }
  broadcastLocked(protocol::makeSceneDiff(scene_.journalSince(before)), session, m.id);
}

bool ServerCore::applyRobotState(const JointState& state, std::optional<SessionId> origin)
{
  std::lock_guard lock(mutex_);
  if (shutting_down_)
    return false;
  const RobotStateUpdate update = scene_.setRobotState(state);
  (void)origin;
  broadcastLocked(protocol::makeRobotState(*scene_.robotState(), update.version));
  return update.clamped;
}

void ServerCore::onRobotState(SessionId session, const Message& m)
{
  const protocol::RobotStateUpdateMsg update = protocol::decodeRobotState(m.body);
  {
    std::lock_guard lock(mutex_);
    if (mirror_enabled_)
    {
      sendLocked(session, protocol::makeWarning("MirrorActive",
                                                "robot_state ignored: the robot is mirroring an external source",
                                                m.id));
      return;
    }
  }
  if (applyRobotState(update.state, session))
    send(session, protocol::makeWarning("StateClamped", "robot_state was clamped into joint limits", m.id));
}

std::uint64_t ServerCore::nextSeed()
{
  if (config_.seed)
    return *config_.seed;
  return std::random_device{}();
}

std::string ServerCore::storeTrajectory(const Trajectory& trajectory)
{
  std::lock_guard lock(mutex_);
  const std::string id = "traj-" + std::to_string(next_trajectory_++);
  trajectories_[id] = trajectory;
  trajectory_order_.push_back(id);
  while (trajectory_order_.size() > config_.trajectory_store)
  {
    trajectories_.erase(trajectory_order_.front());
    trajectory_order_.pop_front();
  }
  return id;
}

void ServerCore::onPlanRequest(SessionId session, const Message& m)
{
  MotionPlanRequest request = json::decodePlanRequest(m.body);
  request.validate();
  if (!request.seed)
    request.seed = nextSeed();
  SceneState snapshot = sceneSnapshot();
  const std::optional<std::int64_t> id = m.id;
  pool_->submit([this, session, id, request = std::move(request), snapshot = std::move(snapshot)](std::stop_token stop) {
    MotionPlanResponse response;
    try
    {
      response = plan(request, snapshot, *config_.model, stop);
    }
    catch (const std::exception& e)
    {
      response = MotionPlanResponse{};
      response.status = PlanStatus::PlanningFailed;
      response.message = std::string("planner failure: ") + e.what();
    }
    std::optional<std::string> trajectory_id;
    if (response.success() && response.trajectory)
      trajectory_id = storeTrajectory(*response.trajectory);
    send(session, protocol::makePlanResponse(response, trajectory_id, id));
  });
}

void ServerCore::onExecuteRequest(SessionId session, const Message& m)
{
  const protocol::ExecuteRequest request = protocol::decodeExecuteRequest(m.body);
  Trajectory trajectory;
  std::string trajectory_id;
  if (request.trajectory)
  {
    trajectory = *request.trajectory;
  }
  else
  {
    std::lock_guard lock(mutex_);
    auto it = trajectories_.find(*request.trajectory_id);
    if (it == trajectories_.end())
      throw Error(ErrorCode::UnknownTrajectory, "unknown trajectory '" + *request.trajectory_id + "'");
    trajectory = it->second;
    trajectory_id = it->first;
  }
  if (trajectory.points.empty())
    throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  const std::size_t dim = config_.model->dimension(trajectory.group);
  for (const auto& p : trajectory.points)
  {
    if (static_cast<std::size_t>(p.positions.size()) != dim)
      throw Error(ErrorCode::DimensionMismatch, "trajectory point has " + std::to_string(p.positions.size()) +
                                                    " positions, group '" + trajectory.group + "' has " +
                                                    std::to_string(dim));
  }
  if (trajectory_id.empty())
    trajectory_id = storeTrajectory(trajectory);

  std::lock_guard control(control_mutex_);
  if (executor_->busy())
    throw Error(ErrorCode::Busy, "executor is already running a trajectory");
  {
    std::lock_guard lock(mutex_);
    if (shutting_down_)
      return;
    execution_ = Execution{ session, m.id, trajectory_id };
    sendLocked(session, protocol::makeExecuteStatus({ trajectory_id, protocol::ExecuteState::Accepted, 0.0 }, m.id));
  }
  const std::optional<std::int64_t> id = m.id;
  executor_->start(
      trajectory,
      [this, session, id, trajectory_id](const JointState& state, double progress) {
        applyRobotState(state);
        send(session, protocol::makeExecuteStatus({ trajectory_id, protocol::ExecuteState::Executing, progress }, id));
      },
      [this](bool completed, double progress) {
        std::lock_guard lock(mutex_);
        if (!execution_)
          return;
        const Execution done = *execution_;
        execution_.reset();
        sendLocked(done.session,
                   protocol::makeExecuteStatus({ done.trajectory_id,
                                                 completed ? protocol::ExecuteState::Done : protocol::ExecuteState::Aborted,
                                                 completed ? 1.0 : progress },
                                               done.request_id));
      });
}

void ServerCore::onExecuteStop(SessionId session, const Message& m)
{
  std::lock_guard control(control_mutex_);
  std::string trajectory_id;
  {
    std::lock_guard lock(mutex_);
    if (!execution_)
    {
      sendLocked(session, protocol::makeWarning("NotExecuting", "no trajectory is executing", m.id));
      return;
    }
    trajectory_id = execution_->trajectory_id;
  }
  executor_->stop();
  send(session, protocol::makeExecuteStatus({ trajectory_id, protocol::ExecuteState::Aborted, 0.0 }, m.id));
}

void ServerCore::onMirrorSet(SessionId session, const Message& m)
{
  const bool enabled = protocol::decodeMirrorSet(m.body);
  std::lock_guard control(control_mutex_);
  bool changed = false;
  {
    std::lock_guard lock(mutex_);
    changed = mirror_enabled_ != enabled;
    mirror_enabled_ = enabled;
    sendLocked(session, protocol::makeMirrorSet(enabled, m.id));
  }
  if (!mirror_source_ || !changed)
    return;
  if (enabled)
    mirror_source_->start([this](const JointState& state) { applyRobotState(state); });
  else
    mirror_source_->stop();
}

void ServerCore::onIkRequest(SessionId session, const Message& m)
{
  const protocol::IkRequest request = protocol::decodeIkRequest(m.body);
  const RobotModel& model = *config_.model;
  const std::size_t dim = model.dimension(request.group);
  JointState seed;
  if (request.seed)
  {
    seed = *request.seed;
  }
  else
  {
    std::lock_guard lock(mutex_);
    const auto& current = scene_.robotState();
    if (current && current->group == request.group && static_cast<std::size_t>(current->positions.size()) == dim)
      seed = *current;
    else
      seed = JointState(request.group, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)));
  }
  IkParams params;
  if (request.position_only)
    params.orientation_weight = 0.0;
  std::mt19937_64 rng(nextSeed());
  const IkResult result =
      inverseKinematicsWithRestarts(model, request.group, request.target, seed, params, kDragIkRestarts, rng);
  Message reply = protocol::makeIkResponse(result, 0);
  reply.id = m.id;
  send(session, reply);
}

}  // namespace erupt::server
