#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>

#include "erupt/error.hpp"
#include "erupt/json_codec.hpp"
#include "support/scenes.hpp"

using namespace erupt;
using erupt::json::Json;

namespace
{
template <typename T, typename Decode>
void expectRoundTrip(const T& value, Decode decode)
{
  const Json j = json::encode(value);
  const Json reparsed = Json::parse(j.dump());
  EXPECT_EQ(json::encode(decode(reparsed)), j) << j.dump();
}

ErrorCode codeOf(const std::function<void()>& fn)
{
  try
  {
    fn();
  }
  catch (const Error& e)
  {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}
}  // namespace

TEST(JsonCodec, PoseIsWxyz)
{
  const Pose p(Eigen::Vector3d(1, 2, 3), Eigen::Quaterniond(0.5, 0.5, 0.5, 0.5));
  const Json j = json::encode(p);
  EXPECT_EQ(j.dump(), R"({"position":[1.0,2.0,3.0],"orientation":[0.5,0.5,0.5,0.5]})");
  const Pose back = json::decodePose(j);
  EXPECT_TRUE(back.position.isApprox(p.position));
  EXPECT_NEAR(back.orientation.angularDistance(p.orientation), 0.0, 1e-15);
}

TEST(JsonCodec, ShapesRoundTrip)
{
  for (const Shape& s : { Shape::box({ 0.1, 0.2, 0.3 }), Shape::sphere(0.4), Shape::cylinder(0.1, 0.5),
                          Shape::capsule(0.2, 0.3) })
    expectRoundTrip(s, json::decodeShape);
  EXPECT_EQ(json::encode(Shape::cylinder(0.1, 0.5)).dump(), R"({"kind":"cylinder","radius":0.1,"half_length":0.5})");
}

TEST(JsonCodec, RandomObjectsRoundTrip)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i)
  {
    CollisionObject o{ "obj" + std::to_string(i), test::randomShape(rng),
                       Pose(Eigen::Vector3d(u(rng), u(rng), u(rng)), test::randomRotation(rng)),
                       static_cast<std::uint64_t>(i) };
    const CollisionObject back = json::decodeObject(Json::parse(json::encode(o).dump()));
    EXPECT_EQ(back.id, o.id);
    EXPECT_EQ(back.revision, o.revision);
    EXPECT_EQ(json::encode(back), json::encode(o));
    // Doubles survive text exactly.
    EXPECT_EQ(back.pose.position, o.pose.position);
  }
}

TEST(JsonCodec, SceneDiffAndSnapshotRoundTrip)
{
  SceneDiff d;
  d.from_version = 3;
  d.to_version = 5;
  d.ops.push_back(SceneOp::add({ "a", Shape::sphere(0.1), Pose(), 4 }));
  d.ops.push_back(SceneOp::setPose("b", Pose(Eigen::Vector3d(1, 0, 0)), 5));
  d.ops.push_back(SceneOp::remove("c"));
  expectRoundTrip(d, json::decodeSceneDiff);
  d.robot_state = JointState("default", Eigen::Vector3d(0.1, 0.2, 0.3));
  expectRoundTrip(d, json::decodeSceneDiff);

  SceneState s;
  s.version = 9;
  s.objects["a"] = { "a", Shape::box({ 1, 1, 1 }), Pose(), 2 };
  expectRoundTrip(s, json::decodeSnapshot);
}

TEST(JsonCodec, PlanRequestDefaults)
{
  const Json j = Json::parse(R"({"start":{"group":"default","positions":[0,0]},
                                 "goal":{"joint_state":{"group":"default","positions":[1,1]}},
                                 "planner_id":"rrt_connect"})");
  const MotionPlanRequest r = json::decodePlanRequest(j);
  EXPECT_EQ(r.group, "default");
  EXPECT_EQ(r.num_attempts, 1);
  EXPECT_DOUBLE_EQ(r.max_planning_time, 5.0);
  EXPECT_DOUBLE_EQ(r.edge_step, 0.05);
  EXPECT_EQ(r.shortcut_iterations, 100);
  EXPECT_FALSE(r.seed.has_value());
  expectRoundTrip(r, json::decodePlanRequest);
}

TEST(JsonCodec, StructuralErrors)
{
  EXPECT_EQ(codeOf([] { json::decodePose(Json::parse(R"({"position":[1,2]})")); }), ErrorCode::InvalidMessage);
  EXPECT_EQ(codeOf([] { json::decodeShape(Json::parse(R"({"kind":"torus"})")); }), ErrorCode::InvalidMessage);
  EXPECT_EQ(codeOf([] { json::decodeJointState(Json::parse(R"({"group":"g","positions":["a"]})")); }),
            ErrorCode::InvalidMessage);
  EXPECT_EQ(codeOf([] { json::parseSceneDocument("{ nope"); }), ErrorCode::MalformedJson);
  EXPECT_EQ(codeOf([] { json::loadSceneFile("/nonexistent/scene.json"); }), ErrorCode::Io);
}

TEST(JsonCodec, BundledScenesLoad)
{
  const auto table = json::loadSceneFile(test::dataPath("scenes/table.json"));
  EXPECT_EQ(table.objects.size(), 5u);
  ASSERT_TRUE(table.robot_state.has_value());
  EXPECT_EQ(table.robot_state->positions.size(), 6);
  EXPECT_TRUE(json::loadSceneFile(test::dataPath("scenes/empty.json")).objects.empty());
  // Structure is fine; dimension checks belong to the scene.
  EXPECT_EQ(json::loadSceneFile(test::dataPath("scenes/malformed_shape.json")).objects.size(), 3u);
}

TEST(JsonCodec, SceneFileSaveLoad)
{
  const auto table = json::loadSceneFile(test::dataPath("scenes/table.json"));
  const auto path = std::filesystem::temp_directory_path() / "erupt_codec_scene.json";
  json::saveSceneFile(path.string(), table);
  const auto back = json::loadSceneFile(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(json::writeSceneDocument(back), json::writeSceneDocument(table));
}
