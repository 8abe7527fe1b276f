#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <future>
#include <random>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "erupt/client.hpp"
#include "erupt/replica.hpp"
#include "erupt/server/network.hpp"
#include "support/server_harness.hpp"

using namespace erupt;
using namespace erupt::protocol;
using erupt::test::greet;
using erupt::test::RecordingPeer;
using erupt::test::serverConfig;
using namespace std::chrono_literals;

namespace
{
auto ofType(std::string_view t)
{
  return [t](const Message& m) { return m.type == t; };
}

Message addOp(const std::string& id, const Shape& shape, const Eigen::Vector3d& at, std::optional<std::int64_t> rid)
{
  SceneOpRequest op;
  op.kind = SceneOpRequest::Kind::Add;
  op.object = CollisionObject{ id, shape, Pose(at), 0 };
  op.id = id;
  return makeSceneOp(op, rid);
}

std::string errorCode(const Message& m)
{
  return decodeError(m.body).code;
}
}  // namespace

TEST(ServerCore, MessagesBeforeHelloAreRejected)
{
  server::ServerCore core(serverConfig("two_link_planar.urdf"));
  auto peer = std::make_shared<RecordingPeer>();
  const auto id = core.connect(peer);
  core.handle(id, makePlannersRequest(1));
  auto got = peer->take();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].type, "error");
  EXPECT_EQ(errorCode(got[0]), "NotReady");
  EXPECT_EQ(got[0].id, 1);
  EXPECT_FALSE(peer->closing());
}

TEST(ServerCore, WrongProtocolVersionClosesWithError)
{
  server::ServerCore core(serverConfig("two_link_planar.urdf"));
  auto peer = std::make_shared<RecordingPeer>();
  const auto id = core.connect(peer);
  core.handle(id, makeHello("old", 2));
  auto got = peer->take();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(errorCode(got[0]), "ProtocolVersion");
  EXPECT_TRUE(peer->closing());
  EXPECT_EQ(core.sessionCount(), 0u);
}

TEST(ServerCore, HelloReportsSceneVersion)
{
  server::ServerCore core(serverConfig("six_dof_arm.urdf", "table.json"));
  auto peer = std::make_shared<RecordingPeer>();
  const auto id = core.connect(peer);
  Message hello = makeHello("ui");
  hello.id = 5;
  core.handle(id, hello);
  auto got = peer->take();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].type, "hello");
  EXPECT_EQ(got[0].id, 5);
  EXPECT_EQ(got[0].body["protocol_version"], 1);
  EXPECT_EQ(got[0].body["scene_version"].get<std::uint64_t>(), core.sceneVersion());
}

TEST(ServerCore, AddFromOneClientReachesTheOtherAsOneAdd)
{
  server::ServerCore core(serverConfig("two_link_planar.urdf"));
  auto [a, pa] = greet(core, "a");
  auto [b, pb] = greet(core, "b");
  const std::uint64_t v0 = core.sceneVersion();
  core.handle(a, addOp("box", Shape::box({ 0.1, 0.1, 0.1 }), { 1.5, 1.5, 0 }, 7));

  auto to_b = pb->take();
  ASSERT_EQ(to_b.size(), 1u);
  EXPECT_EQ(to_b[0].type, "scene_diff");
  EXPECT_FALSE(to_b[0].id.has_value());
  const SceneDiff diff = json::decodeSceneDiff(to_b[0].body);
  EXPECT_EQ(diff.from_version, v0);
  EXPECT_EQ(diff.to_version, v0 + 1);
  ASSERT_EQ(diff.ops.size(), 1u);
  EXPECT_EQ(diff.ops[0].kind, SceneOp::Kind::Add);
  EXPECT_EQ(diff.ops[0].id, "box");

  auto to_a = pa->take();
  ASSERT_EQ(to_a.size(), 1u);
  EXPECT_EQ(to_a[0].id, 7);
  EXPECT_EQ(to_a[0].body, to_b[0].body);
}

TEST(ServerCore, ResizeIsJournaledAsRemoveAdd)
{
  server::ServerCore core(serverConfig("two_link_planar.urdf"));
  auto [a, pa] = greet(core, "a");
  core.handle(a, addOp("box", Shape::box({ 0.1, 0.1, 0.1 }), { 1.5, 1.5, 0 }, 1));
  pa->take();
  SceneOpRequest resize;
  resize.kind = SceneOpRequest::Kind::Resize;
  resize.id = "box";
  resize.shape = Shape::sphere(0.3);
  core.handle(a, makeSceneOp(resize, 2));
  auto got = pa->take();
  ASSERT_EQ(got.size(), 1u);
  const SceneDiff diff = json::decodeSceneDiff(got[0].body);
  EXPECT_EQ(diff.to_version, diff.from_version + 1);
  ASSERT_EQ(diff.ops.size(), 2u);
  EXPECT_EQ(diff.ops[0].kind, SceneOp::Kind::Remove);
  EXPECT_EQ(diff.ops[1].kind, SceneOp::Kind::Add);
  EXPECT_EQ(diff.ops[1].object.shape, Shape::sphere(0.3));
}

TEST(ServerCore, SceneOpErrorsAreRepliedNotBroadcast)
{
  server::ServerCore core(serverConfig("two_link_planar.urdf"));
  auto [a, pa] = greet(core, "a");
  auto [b, pb] = greet(core, "b");
  core.handle(a, addOp("box", Shape::box({ 0.1, 0.1, 0.1 }), { 1.5, 1.5, 0 }, 1));
  pa->take();
  pb->take();
  core.handle(a, addOp("box", Shape::sphere(0.1), { 0, 0, 0 }, 2));
  core.handle(a, addOp("flat", Shape::sphere(0.0), { 0, 0, 0 }, 3));
  SceneOpRequest remove;
  remove.kind = SceneOpRequest::Kind::Remove;
  remove.id = "ghost";
  core.handle(a, makeSceneOp(remove, 4));
  auto got = pa->take();
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(errorCode(got[0]), "DuplicateId");
  EXPECT_EQ(got[0].id, 2);
  EXPECT_EQ(errorCode(got[1]), "InvalidShape");
  EXPECT_EQ(errorCode(got[2]), "UnknownId");
  EXPECT_TRUE(pb->take().empty());
}

TEST(ServerCore, UnknownPlannerKeepsSessionOpen)
{
  server::ServerCore core(serverConfig("two_link_planar.urdf"));
  auto [a, pa] = greet(core, "a");
  MotionPlanRequest req;
  req.start = JointState("default", Eigen::Vector2d(0, 0));
  req.goal = JointState("default", Eigen::Vector2d(1, 1));
  Message m = makePlanRequest(req, 3);
  m.body["planner_id"] = "teleport";
  core.handle(a, m);
  auto got = pa->take();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].type, "error");
  EXPECT_EQ(errorCode(got[0]), "UnknownPlanner");
  EXPECT_EQ(got[0].id, 3);
  EXPECT_FALSE(pa->closing());

  core.handle(a, makePlannersRequest(4));
  got = pa->take();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].type, "planners");
  EXPECT_EQ(got[0].body["planner_ids"], Json(plannerIds()));
}

TEST(ServerCore, PlanUsesSnapshotAndReturnsTrajectoryId)
{
  server::ServerCore core(serverConfig("two_link_planar.urdf", "blocked_corridor.json"));
  auto [a, pa] = greet(core, "a");
  MotionPlanRequest req;
  req.start = JointState("default", Eigen::Vector2d(-2.4, 0));
  req.goal = JointState("default", Eigen::Vector2d(2.4, 0));
  core.handle(a, makePlanRequest(req, 9));
  // Edits during planning must not reach the in-flight plan.
  core.handle(a, addOp("late", Shape::sphere(0.2), { 0.0, 0.0, 0.0 }, 10));
  auto reply = pa->waitFor(ofType("plan_response"));
  ASSERT_TRUE(reply);
  EXPECT_EQ(reply->id, 9);
  const MotionPlanResponse resp = json::decodePlanResponse(reply->body);
  EXPECT_EQ(resp.status, PlanStatus::Success) << resp.message;
  ASSERT_TRUE(reply->body.contains("trajectory_id"));
  // The edit landed before the response was produced.
  EXPECT_TRUE(std::any_of(pa->seen.begin(), pa->seen.end(), [](const Message& m) { return m.id == 10; }));
}

TEST(ServerCore, PlanFailuresAreResponsesNotDisconnects)
{
  server::ServerCore core(serverConfig("two_link_planar.urdf", "start_in_collision.json"));
  auto [a, pa] = greet(core, "a");
  MotionPlanRequest req;
  req.start = JointState("default", Eigen::Vector2d(0, 0));
  req.goal = JointState("default", Eigen::Vector2d(2.0, 0));
  core.handle(a, makePlanRequest(req, 1));
  req.group = "no_such_group";
  core.handle(a, makePlanRequest(req, 2));
  auto r1 = pa->waitFor([](const Message& m) { return m.id == 1; });
  auto r2 = pa->waitFor([](const Message& m) { return m.id == 2; });
  ASSERT_TRUE(r1 && r2);
  EXPECT_EQ(r1->body["status"], "INVALID_START_STATE");
  EXPECT_EQ(r2->body["status"], "PLANNING_FAILED");
  EXPECT_FALSE(r1->body.contains("trajectory_id"));
  EXPECT_FALSE(pa->closing());
}

TEST(ServerCore, ClientRobotStateIsRebroadcastWithVersion)
{
  server::ServerCore core(serverConfig("two_link_planar.urdf"));
  auto [a, pa] = greet(core, "a");
  auto [b, pb] = greet(core, "b");
  const auto v0 = core.sceneVersion();
  core.handle(a, makeRobotState(JointState("default", Eigen::Vector2d(0.3, -0.2))));
  auto got = pb->take();
  ASSERT_EQ(got.size(), 1u);
  const auto update = decodeRobotState(got[0].body);
  EXPECT_EQ(update.version, v0 + 1);
  EXPECT_EQ(update.state.positions, Eigen::Vector2d(0.3, -0.2));
  EXPECT_EQ(core.sceneSnapshot().robot_state->positions, Eigen::Vector2d(0.3, -0.2));

  // Out-of-limit states are clamped and the sender is told.
  core.handle(a, makeRobotState(JointState("default", Eigen::Vector2d(9.0, 0.0))));
  auto warn = pa->waitFor(ofType("warning"), 100ms);
  ASSERT_TRUE(warn);
  EXPECT_EQ(warn->body["code"], "StateClamped");
  EXPECT_NEAR(core.sceneSnapshot().robot_state->positions[0], M_PI, 1e-12);
}

TEST(ServerCore, MirrorIgnoresDragsUntilDisabled)
{
  server::ServerCore core(serverConfig("two_link_planar.urdf"));
  auto [a, pa] = greet(core, "a");
  core.handle(a, makeMirrorSet(true, 1));
  auto ack = pa->take();
  ASSERT_EQ(ack.size(), 1u);
  EXPECT_EQ(ack[0].type, "mirror_set");
  EXPECT_EQ(ack[0].body["enabled"], true);
  EXPECT_EQ(ack[0].id, 1);
  EXPECT_TRUE(core.mirrorEnabled());

  const auto before = core.sceneSnapshot();
  Message drag = makeRobotState(JointState("default", Eigen::Vector2d(0.5, 0.5)));
  drag.id = 2;
  core.handle(a, drag);
  auto got = pa->take();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].type, "warning");
  EXPECT_EQ(got[0].body["code"], "MirrorActive");
  EXPECT_EQ(got[0].id, 2);
  EXPECT_EQ(core.sceneSnapshot().robot_state, before.robot_state);
  EXPECT_EQ(core.sceneVersion(), before.version);

  core.handle(a, makeMirrorSet(false, 3));
  pa->take();
  core.handle(a, drag);
  got = pa->take();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].type, "robot_state");
  EXPECT_EQ(core.sceneSnapshot().robot_state->positions, Eigen::Vector2d(0.5, 0.5));
}

TEST(ServerCore, MirrorReplayIsObservedInOrder)
{
  auto config = serverConfig("two_link_planar.urdf");
  config.mirror_file = test::dataPath("trajectories/two_link_wave.json");
  config.playback_rate = 4.0;
  server::ServerCore core(config);
  auto [a, pa] = greet(core, "a");
  auto [b, pb] = greet(core, "b");
  core.handle(a, makeMirrorSet(true, 1));

  const Trajectory recording =
      json::decodeTrajectory(Json::parse(std::ifstream(test::dataPath("trajectories/two_link_wave.json"))));
  std::vector<Eigen::VectorXd> observed;
  while (observed.size() < recording.points.size())
  {
    auto m = pb->waitFor(ofType("robot_state"), 2000ms);
    ASSERT_TRUE(m) << "only " << observed.size() << " states";
    observed.push_back(decodeRobotState(m->body).state.positions);
  }
  for (std::size_t i = 0; i < recording.points.size(); ++i)
    EXPECT_EQ(observed[i], recording.points[i].positions) << i;
}

TEST(ServerCore, SnapshotSinceReturnsDiffOrSnapshot)
{
  auto config = serverConfig("two_link_planar.urdf");
  config.journal_retention = 4;
  server::ServerCore core(config);
  auto [a, pa] = greet(core, "a");
  const auto v0 = core.sceneVersion();
  core.handle(a, addOp("x", Shape::sphere(0.1), { 1.5, 0, 0 }, 1));
  pa->take();
  core.handle(a, makeSnapshotRequest(2, v0));
  auto got = pa->take();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].type, "scene_diff");
  EXPECT_EQ(got[0].id, 2);
  EXPECT_EQ(json::decodeSceneDiff(got[0].body).ops.size(), 1u);

  for (int i = 0; i < 6; ++i)
    core.handle(a, makeRobotState(JointState("default", Eigen::Vector2d(0.1 * i, 0))));
  pa->take();
  core.handle(a, makeSnapshotRequest(3, v0));
  got = pa->take();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].type, "snapshot");
  EXPECT_EQ(json::decodeSnapshot(got[0].body).version, core.sceneVersion());
}

TEST(ServerCore, ServerOnlyTypesAndBadBodiesAreErrors)
{
  server::ServerCore core(serverConfig("two_link_planar.urdf"));
  auto [a, pa] = greet(core, "a");
  core.handle(a, makeSnapshot(core.sceneSnapshot(), 1));
  Message bad;
  bad.type = "scene_op";
  bad.id = 2;
  bad.body = Json{ { "op", "explode" } };
  core.handle(a, bad);
  core.handle(a, DecodeError{ ErrorCode::UnknownType, "unknown message type 'x'", 3, false });
  auto got = pa->take();
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(errorCode(got[0]), "InvalidMessage");
  EXPECT_EQ(errorCode(got[1]), "InvalidMessage");
  EXPECT_EQ(got[1].id, 2);
  EXPECT_EQ(errorCode(got[2]), "UnknownType");
  EXPECT_EQ(got[2].id, 3);
  EXPECT_FALSE(pa->closing());

  core.handle(a, DecodeError{ ErrorCode::MalformedJson, "bad", std::nullopt, true });
  got = pa->take();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(errorCode(got[0]), "MalformedJson");
  EXPECT_TRUE(pa->closing());
  EXPECT_EQ(core.sessionCount(), 0u);
}

TEST(ServerCore, OutboundOverflowDropsSession)
{
  server::ServerCore core(serverConfig("two_link_planar.urdf"));
  auto [a, pa] = greet(core, "a");
  auto slow = std::make_shared<RecordingPeer>(5);
  const auto s = core.connect(slow);
  core.handle(s, makeHello("slow"));
  for (int i = 0; i < 10; ++i)
    core.handle(a, makeRobotState(JointState("default", Eigen::Vector2d(0.01 * i, 0))));
  EXPECT_EQ(core.sessionCount(), 1u);
  EXPECT_TRUE(slow->overflowed());
  auto got = slow->take();
  ASSERT_EQ(got.size(), 6u);
  EXPECT_EQ(got.back().type, "error");
  EXPECT_EQ(errorCode(got.back()), "Busy");
}

TEST(ServerCore, IkRequestResolvesReachableTarget)
{
  server::ServerCore core(serverConfig("six_dof_arm.urdf"));
  auto model = test::loadModel("six_dof_arm.urdf");
  auto [a, pa] = greet(core, "ui");
  Eigen::VectorXd q(6);
  q << 0.3, -0.4, 0.8, 0.1, 0.5, -0.2;
  IkRequest req;
  req.group = model->defaultGroupName();
  req.target = forwardKinematics(*model, req.group, JointState(req.group, q)).tip;
  core.handle(a, makeIkRequest(req, 11));
  auto got = pa->take();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].type, "ik_response");
  EXPECT_EQ(got[0].id, 11);
  const IkResult result = decodeIkResponse(got[0].body);
  ASSERT_EQ(result.status, IkStatus::Success);
  const Pose tip = forwardKinematics(*model, req.group, result.state).tip;
  EXPECT_LT((tip.position - req.target.position).norm(), 1e-4);

  req.target = Pose(Eigen::Vector3d(25.0, 0, 0));
  req.position_only = true;
  core.handle(a, makeIkRequest(req, 12));
  got = pa->take();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(decodeIkResponse(got[0].body).status, IkStatus::UnreachableHint);

  req.group = "nope";
  core.handle(a, makeIkRequest(req, 13));
  got = pa->take();
  EXPECT_EQ(errorCode(got.at(0)), "UnknownGroup");
}

TEST(MockExecutor, KnotStatesMatchWaypoints)
{
  Trajectory t = test::straightTrajectory("default", Eigen::Vector2d(0, 0), Eigen::Vector2d(0.8, -0.4), 0.3);
  t.points[1].time_from_start = 0.1234;  // off the 50 Hz grid
  t.points[1].positions = Eigen::Vector2d(0.2, 0.1);
  server::MockExecutor exec({}, 1.0, 50.0);
  std::mutex m;
  std::vector<std::pair<double, Eigen::VectorXd>> states;
  std::promise<bool> finished;
  const auto times = server::MockExecutor::publishTimes(t, 1.0, 50.0);
  std::size_t k = 0;
  exec.start(
      t,
      [&](const JointState& s, double) {
        std::lock_guard lock(m);
        states.emplace_back(times.at(k++), s.positions);
      },
      [&](bool completed, double) { finished.set_value(completed); });
  EXPECT_TRUE(finished.get_future().get());
  ASSERT_EQ(states.size(), times.size());
  for (const auto& p : t.points)
  {
    auto it = std::find_if(states.begin(), states.end(), [&](const auto& s) { return s.first == p.time_from_start; });
    ASSERT_NE(it, states.end()) << "knot at " << p.time_from_start << " not published";
    EXPECT_LT((it->second - p.positions).cwiseAbs().maxCoeff(), 1e-9);
  }
  // 50 Hz grid: consecutive publications never further apart than 20 ms.
  for (std::size_t i = 1; i < times.size(); ++i)
    EXPECT_LE(times[i] - times[i - 1], 0.02 + 1e-12);
}

TEST(MockExecutor, BusyWhileRunningAndStoppable)
{
  const Trajectory t = test::straightTrajectory("default", Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), 5.0);
  server::MockExecutor exec;
  std::promise<bool> finished;
  exec.start(t, [](const JointState&, double) {}, [&](bool completed, double) { finished.set_value(completed); });
  EXPECT_TRUE(exec.busy());
  try
  {
    exec.start(t, [](const JointState&, double) {}, [](bool, double) {});
    FAIL() << "expected Busy";
  }
  catch (const Error& e)
  {
    EXPECT_EQ(e.code(), ErrorCode::Busy);
  }
  const auto t0 = std::chrono::steady_clock::now();
  exec.stop();
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 200ms);
  EXPECT_FALSE(finished.get_future().get());
  EXPECT_FALSE(exec.busy());
}

// Network-level tests use ephemeral ports.
class ServerNet : public ::testing::Test
{
protected:
  void startServer(server::ServerConfig config, std::string static_dir = "")
  {
    core_ = std::make_unique<server::ServerCore>(std::move(config));
    server::NetworkConfig net;
    net.bind_address = "127.0.0.1";
    net.tcp_port = 0;
    net.ws_port = 0;
    net.static_dir = std::move(static_dir);
    net_ = std::make_unique<server::NetworkServer>(*core_, net);
    net_->start();
  }

  void TearDown() override
  {
    if (net_)
      net_->stop();
  }

  std::unique_ptr<Client> client(const std::string& name)
  {
    auto c = std::make_unique<Client>("127.0.0.1", net_->tcpPort());
    c->handshake(name);
    return c;
  }

  std::unique_ptr<server::ServerCore> core_;
  std::unique_ptr<server::NetworkServer> net_;
};

TEST_F(ServerNet, HelloOverTcp)
{
  startServer(serverConfig("two_link_planar.urdf", "blocked_corridor.json"));
  Client c("127.0.0.1", net_->tcpPort());
  c.send(makeHello("ui"));
  auto hello = c.next(2000ms);
  ASSERT_TRUE(hello);
  EXPECT_EQ(hello->type, "hello");
  auto snap = c.request(makeSnapshotRequest(c.nextId()));
  EXPECT_EQ(snap.type, "snapshot");
  EXPECT_EQ(json::decodeSnapshot(snap.body).objects.size(), 3u);
}

TEST_F(ServerNet, MalformedFrameClosesWithErrorUnknownTypeDoesNot)
{
  startServer(serverConfig("two_link_planar.urdf"));
  auto c = client("a");
  c->sendBytes(encodeFramePayload(R"({"type":"warp","id":77,"body":{}})"));
  auto err = c->waitFor(ofType("error"), 2000ms);
  ASSERT_TRUE(err);
  EXPECT_EQ(errorCode(*err), "UnknownType");
  EXPECT_EQ(err->id, 77);
  EXPECT_EQ(c->request(makePlannersRequest(c->nextId())).type, "planners");

  c->sendBytes(encodeFramePayload("{not json"));
  err = c->waitFor(ofType("error"), 2000ms);
  ASSERT_TRUE(err);
  EXPECT_EQ(errorCode(*err), "MalformedJson");
  EXPECT_TRUE(c->waitClosed(2000ms));
}

TEST_F(ServerNet, OversizeLengthPrefixClosesConnection)
{
  startServer(serverConfig("two_link_planar.urdf"));
  auto c = client("a");
  c->sendBytes(std::string("\x01\x00\x00\x01", 4));
  auto err = c->waitFor(ofType("error"), 2000ms);
  ASSERT_TRUE(err);
  EXPECT_EQ(errorCode(*err), "FrameTooLong");
  EXPECT_TRUE(c->waitClosed(2000ms));
}

TEST_F(ServerNet, ExecuteTimingAndBusy)
{
  startServer(serverConfig("two_link_planar.urdf"));
  auto a = client("a");
  auto b = client("b");
  const Trajectory t = test::straightTrajectory("default", Eigen::Vector2d(0, 0), Eigen::Vector2d(1.0, -0.5), 2.0);
  const std::int64_t id = a->nextId();
  a->send(makeExecuteRequest({ std::nullopt, t }, id));
  auto accepted = a->waitFor([&](const Message& m) { return m.id == id; }, 2000ms);
  const auto t_accepted = std::chrono::steady_clock::now();
  ASSERT_TRUE(accepted);
  EXPECT_EQ(accepted->body["status"], "accepted");

  // A second execution is refused while the first runs.
  auto busy = b->request(makeExecuteRequest({ std::nullopt, t }, b->nextId()));
  EXPECT_EQ(busy.type, "error");
  EXPECT_EQ(errorCode(busy), "Busy");

  auto done = a->waitFor(
      [&](const Message& m) { return m.id == id && m.type == "execute_status" && m.body["status"] != "executing"; },
      5000ms);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_accepted).count();
  ASSERT_TRUE(done);
  EXPECT_EQ(done->body["status"], "done");
  EXPECT_NEAR(elapsed, 2.0, 0.1);

  // Observers saw the knots.
  std::vector<Eigen::VectorXd> seen;
  while (auto m = b->waitFor(ofType("robot_state"), 0ms))
    seen.push_back(decodeRobotState(m->body).state.positions);
  for (const auto& p : t.points)
  {
    EXPECT_TRUE(std::any_of(seen.begin(), seen.end(),
                            [&](const Eigen::VectorXd& q) { return (q - p.positions).cwiseAbs().maxCoeff() < 1e-9; }))
        << "knot at t=" << p.time_from_start;
  }
  EXPECT_GE(seen.size(), 100u);
}

TEST_F(ServerNet, ExecuteStopAborts)
{
  startServer(serverConfig("two_link_planar.urdf"));
  auto a = client("a");
  const Trajectory t = test::straightTrajectory("default", Eigen::Vector2d(0, 0), Eigen::Vector2d(1.0, -0.5), 3.0);
  const std::int64_t id = a->nextId();
  a->send(makeExecuteRequest({ std::nullopt, t }, id));
  ASSERT_TRUE(a->waitFor([&](const Message& m) { return m.id == id; }, 2000ms));
  std::this_thread::sleep_for(200ms);
  auto stop_reply = a->request(makeExecuteStop(a->nextId()));
  EXPECT_EQ(stop_reply.body["status"], "aborted");
  auto aborted = a->waitFor(
      [&](const Message& m) { return m.id == id && m.body.value("status", std::string()) == "aborted"; }, 2000ms);
  ASSERT_TRUE(aborted);
  EXPECT_LT(aborted->body["progress"].get<double>(), 0.5);
  EXPECT_FALSE(core_->executing());
}

TEST_F(ServerNet, PlanThenExecuteById)
{
  startServer(serverConfig("two_link_planar.urdf"));
  auto a = client("a");
  MotionPlanRequest req;
  req.start = JointState("default", Eigen::Vector2d(0, 0));
  req.goal = JointState("default", Eigen::Vector2d(0.4, 0.2));
  auto resp = a->request(makePlanRequest(req, a->nextId()));
  ASSERT_EQ(resp.body["status"], "SUCCESS");
  const std::string traj_id = resp.body["trajectory_id"];
  const std::int64_t id = a->nextId();
  a->send(makeExecuteRequest({ traj_id, std::nullopt }, id));
  auto done = a->waitFor(
      [&](const Message& m) { return m.id == id && m.body.value("status", std::string()) == "done"; }, 5000ms);
  ASSERT_TRUE(done);
  EXPECT_EQ(done->body["trajectory_id"], traj_id);
  EXPECT_LT((core_->sceneSnapshot().robot_state->positions - Eigen::Vector2d(0.4, 0.2)).norm(), 1e-9);

  auto missing = a->request(makeExecuteRequest({ std::string("traj-999"), std::nullopt }, a->nextId()));
  EXPECT_EQ(errorCode(missing), "UnknownTrajectory");
}

TEST_F(ServerNet, TwoClientsConverge)
{
  startServer(serverConfig("two_link_planar.urdf"));
  std::vector<std::unique_ptr<Client>> clients;
  std::vector<SceneReplica> replicas(2);
  for (int i = 0; i < 2; ++i)
    clients.push_back(client("c" + std::to_string(i)));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  // Each client edits only what it created; across clients the order is
  // whatever the server sees.
  std::vector<std::vector<std::string>> owned(2);
  for (int step = 0; step < 200; ++step)
  {
    Client& c = *clients[step % 2];
    auto& ids = owned[step % 2];
    SceneOpRequest op;
    const int kind = ids.empty() ? 0 : static_cast<int>(rng() % 4);
    if (kind == 0)
    {
      op.kind = SceneOpRequest::Kind::Add;
      op.object = { "o" + std::to_string(step), Shape::sphere(0.1), Pose(Eigen::Vector3d(u(rng), u(rng), 0)), 0 };
      ids.push_back(op.object.id);
    }
    else
    {
      op.id = ids[rng() % ids.size()];
      if (kind == 1)
      {
        op.kind = SceneOpRequest::Kind::SetPose;
        op.pose = Pose(Eigen::Vector3d(u(rng), u(rng), 0));
      }
      else if (kind == 2)
      {
        op.kind = SceneOpRequest::Kind::Resize;
        op.shape = Shape::box({ 0.1, 0.2, 0.1 });
      }
      else
      {
        op.kind = SceneOpRequest::Kind::Remove;
        ids.erase(std::find(ids.begin(), ids.end(), op.id));
      }
    }
    c.send(makeSceneOp(op, c.nextId()));
    if (step % 7 == 0)
      clients[(step + 1) % 2]->send(makeRobotState(JointState("default", Eigen::Vector2d(u(rng) / 2, 0))));
  }
  // Quiescence: an id-tagged request after everything else.
  for (auto& c : clients)
    c->request(makePlannersRequest(c->nextId()));
  const SceneState server_scene = core_->sceneSnapshot();
  for (int i = 0; i < 2; ++i)
  {
    while (auto m = clients[i]->next(200ms))
    {
      if (m->type == "error")
        ADD_FAILURE() << m->body.dump();
      if (replicas[i].apply(*m) == SceneReplica::Outcome::NeedsResync)
        ADD_FAILURE() << "gap at " << replicas[i].version();
    }
    EXPECT_EQ(replicas[i].state(), server_scene) << "client " << i;
  }
}

TEST_F(ServerNet, ShutdownSendsErrorFrames)
{
  startServer(serverConfig("two_link_planar.urdf"));
  auto a = client("a");
  auto b = client("b");
  a->request(makePlannersRequest(a->nextId()));
  net_->stop("maintenance");
  for (auto* c : { a.get(), b.get() })
  {
    auto err = c->waitFor(ofType("error"), 2000ms);
    ASSERT_TRUE(err);
    EXPECT_EQ(errorCode(*err), "ShuttingDown");
    EXPECT_EQ(err->body["human_text"], "maintenance");
    EXPECT_TRUE(c->waitClosed(2000ms));
  }
}

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = boost::asio::ip::tcp;

TEST_F(ServerNet, WebSocketSpeaksTheSameMessages)
{
  startServer(serverConfig("six_dof_arm.urdf", "table.json"));
  boost::asio::io_context io;
  websocket::stream<tcp::socket> ws(io);
  ws.next_layer().connect(tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), net_->wsPort()));
  ws.handshake("127.0.0.1", "/ws");
  ws.text(true);
  auto roundTrip = [&](const Message& m) {
    ws.write(boost::asio::buffer(serialize(m)));
    beast::flat_buffer buf;
    ws.read(buf);
    return std::get<Message>(decodePayload(beast::buffers_to_string(buf.data())));
  };
  Message hello = makeHello("ui");
  hello.id = 1;
  EXPECT_EQ(roundTrip(hello).type, "hello");
  const Message snap = roundTrip(makeSnapshotRequest(2));
  EXPECT_EQ(snap.type, "snapshot");
  EXPECT_EQ(json::decodeSnapshot(snap.body).objects.size(), 5u);

  auto model = test::loadModel("six_dof_arm.urdf");
  IkRequest ik;
  ik.group = model->defaultGroupName();
  Eigen::VectorXd q(6);
  q << 0.2, 0.3, -0.5, 0.0, 0.4, 0.0;
  ik.target = forwardKinematics(*model, ik.group, JointState(ik.group, q)).tip;
  const Message reply = roundTrip(makeIkRequest(ik, 3));
  EXPECT_EQ(reply.type, "ik_response");
  EXPECT_EQ(reply.id, 3);
  EXPECT_EQ(reply.body["status"], "success");

  // Mixed transports share one scene.
  auto tcp_client = client("tcp");
  tcp_client->send(addOp("from_tcp", Shape::sphere(0.05), { 0.2, 0.5, 0.9 }, tcp_client->nextId()));
  beast::flat_buffer buf;
  ws.read(buf);
  const Message diff = std::get<Message>(decodePayload(beast::buffers_to_string(buf.data())));
  EXPECT_EQ(diff.type, "scene_diff");
  EXPECT_EQ(json::decodeSceneDiff(diff.body).ops.at(0).id, "from_tcp");
  ws.close(websocket::close_code::normal);
}

TEST_F(ServerNet, StaticFilesAreServed)
{
  const auto dir = std::filesystem::temp_directory_path() / "erupt_static_test";
  std::filesystem::create_directories(dir / "js");
  std::ofstream(dir / "index.html") << "<html>console</html>";
  std::ofstream(dir / "js" / "app.js") << "console.log(1);";
  startServer(serverConfig("two_link_planar.urdf"), dir.string());

  auto get = [&](const std::string& target) {
    boost::asio::io_context io;
    tcp::socket s(io);
    s.connect(tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), net_->wsPort()));
    http::request<http::empty_body> req(http::verb::get, target, 11);
    req.set(http::field::host, "localhost");
    req.keep_alive(false);
    http::write(s, req);
    beast::flat_buffer buf;
    http::response<http::string_body> res;
    http::read(s, buf, res);
    return res;
  };
  auto index = get("/");
  EXPECT_EQ(index.result(), http::status::ok);
  EXPECT_EQ(index.body(), "<html>console</html>");
  EXPECT_EQ(index[http::field::content_type], "text/html; charset=utf-8");
  auto js = get("/js/app.js?v=3");
  EXPECT_EQ(js.result(), http::status::ok);
  EXPECT_EQ(js[http::field::content_type], "text/javascript; charset=utf-8");
  EXPECT_EQ(get("/missing.css").result(), http::status::not_found);
  EXPECT_EQ(get("/../etc/passwd").result(), http::status::bad_request);
  std::filesystem::remove_all(dir);
}
