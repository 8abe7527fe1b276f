#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "erupt/error.hpp"
#include "erupt/trajectory.hpp"
#include "erupt/urdf.hpp"
#include "support/oracles.hpp"

namespace erupt
{
namespace
{
// Single-axis rest-to-rest trapezoid duration.
double trapezoidDuration(double distance, double vmax, double accel)
{
  if (distance >= vmax * vmax / accel)
    return distance / vmax + vmax / accel;
  return 2.0 * std::sqrt(distance / accel);
}

std::string readFile(const std::string& path)
{
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RobotModel twoLinkWithVelocity(const std::string& velocity)
{
  std::string text = readFile(test::dataPath("urdf/two_link_planar.urdf"));
  for (std::size_t pos = text.find("velocity=\"1.0\""); pos != std::string::npos;
       pos = text.find("velocity=\"1.0\"", pos + 1))
    text.replace(pos, 14, "velocity=\"" + velocity + "\"");
  return parseUrdf(text);
}

class TrajectoryTest : public ::testing::Test
{
protected:
  RobotModel model = loadUrdfFile(test::dataPath("urdf/two_link_planar.urdf"));
};

TEST_F(TrajectoryTest, SingleWaypoint)
{
  const Trajectory t = timeParameterize(model, "default", { Eigen::Vector2d(0.3, -0.2) });
  ASSERT_EQ(t.points.size(), 1u);
  EXPECT_EQ(t.points[0].time_from_start, 0.0);
  EXPECT_EQ(t.points[0].positions, Eigen::Vector2d(0.3, -0.2));
  EXPECT_EQ(t.points[0].velocities, Eigen::Vector2d::Zero());
}

TEST_F(TrajectoryTest, TrapezoidDurationClosedForm)
{
  // Delta (1, 0) with vmax 1 and accel 2: 1/1 + 1/2 = 1.5 s.
  const Trajectory t = timeParameterize(model, "default", { Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0) });
  EXPECT_NEAR(t.duration(), trapezoidDuration(1.0, 1.0, 2.0), 1e-12);
  EXPECT_NEAR(t.duration(), 1.5, 1e-12);
  for (double time = 0.0; time <= t.duration(); time += 1e-3)
    EXPECT_LE(std::abs(sampleTrajectory(t, time).velocities[0]), 1.0 + 1e-9);

  // Short move never reaches cruise speed.
  const Trajectory tri = timeParameterize(model, "default", { Eigen::Vector2d(0, 0), Eigen::Vector2d(0, -0.2) });
  EXPECT_NEAR(tri.duration(), trapezoidDuration(0.2, 1.0, 2.0), 1e-12);
}

TEST_F(TrajectoryTest, InvariantsOnRandomPaths)
{
  std::mt19937_64 rng(3);
  const RobotModel six = loadUrdfFile(test::dataPath("urdf/six_dof_arm.urdf"));
  const std::vector<std::uint8_t> wrap = continuousMask(six, "default");
  const Group& g = six.group("default");
  for (int trial = 0; trial < 20; ++trial)
  {
    std::vector<Eigen::VectorXd> path;
    for (int i = 0; i < 2 + trial % 4; ++i)
      path.push_back(randomState(six, "default", rng).positions);
    const Trajectory t = timeParameterize(six, "default", path);

    ASSERT_FALSE(t.points.empty());
    EXPECT_EQ(t.points.front().time_from_start, 0.0);
    EXPECT_EQ(t.points.front().velocities.norm(), 0.0);
    EXPECT_EQ(t.points.back().velocities.norm(), 0.0);
    for (std::size_t i = 1; i < t.points.size(); ++i)
      EXPECT_GT(t.points[i].time_from_start, t.points[i - 1].time_from_start);

    // Every waypoint appears verbatim, in order.
    std::size_t next = 0;
    for (const auto& p : t.points)
      if (next < path.size() && p.positions == path[next])
        ++next;
    EXPECT_EQ(next, path.size());

    // Lower bound: no joint can finish its own move faster than its own trapezoid.
    double bound = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i)
    {
      double seg = 0.0;
      for (std::size_t k = 0; k < g.actuated.size(); ++k)
      {
        double d = path[i][k] - path[i - 1][k];
        if (wrap[k])
          d = wrapAngle(d);
        seg = std::max(seg, trapezoidDuration(std::abs(d), *six.joints()[g.actuated[k]].limits.max_velocity,
                                              kDefaultAcceleration));
      }
      bound += seg;
    }
    EXPECT_GE(t.duration(), bound - 1e-9);

    for (double time = 0.0; time <= t.duration(); time += 1e-3)
    {
      const TrajectorySample s = sampleTrajectory(t, time, wrap);
      for (std::size_t k = 0; k < g.actuated.size(); ++k)
        ASSERT_LE(std::abs(s.velocities[k]), *six.joints()[g.actuated[k]].limits.max_velocity + 1e-9);
    }
  }
}

TEST_F(TrajectoryTest, SamplingIsExactAtPointsAndMatchesProfile)
{
  const Trajectory t = timeParameterize(model, "default", { Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0.5) });
  for (const auto& p : t.points)
  {
    const TrajectorySample s = sampleTrajectory(t, p.time_from_start);
    EXPECT_EQ(s.positions, p.positions);
  }
  // Acceleration phase: q0(t) = 0.5 * a * t^2 for the binding joint.
  const double ta = 0.5;
  for (double time : { 0.1, 0.25, 0.4 })
    EXPECT_NEAR(sampleTrajectory(t, time).positions[0], 0.5 * 2.0 * time * time, 1e-12);
  EXPECT_NEAR(sampleTrajectory(t, ta).velocities[0], 1.0, 1e-12);
  EXPECT_EQ(sampleTrajectory(t, -1.0).positions, Eigen::Vector2d(0, 0));
  EXPECT_EQ(sampleTrajectory(t, 99.0).positions, Eigen::Vector2d(1, 0.5));
}

TEST_F(TrajectoryTest, FasterJointsNeverSlowDown)
{
  const RobotModel fast = twoLinkWithVelocity("2.0");
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial)
  {
    std::vector<Eigen::VectorXd> path;
    for (int i = 0; i < 4; ++i)
      path.push_back(randomState(model, "default", rng).positions);
    EXPECT_LE(timeParameterize(fast, "default", path).duration(), timeParameterize(model, "default", path).duration());
  }
}

TEST_F(TrajectoryTest, RepeatedWaypointsAreSkipped)
{
  const Trajectory t =
      timeParameterize(model, "default", { Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0) });
  EXPECT_NEAR(t.duration(), 1.5, 1e-12);
  for (std::size_t i = 1; i < t.points.size(); ++i)
    EXPECT_GT(t.points[i].time_from_start, t.points[i - 1].time_from_start);
}

TEST_F(TrajectoryTest, ContinuousJointTakesShortArc)
{
  const RobotModel six = loadUrdfFile(test::dataPath("urdf/six_dof_arm.urdf"));
  Eigen::VectorXd a = Eigen::VectorXd::Zero(6), b = Eigen::VectorXd::Zero(6);
  a[5] = 3.0;
  b[5] = -3.0;  // 0.283 rad apart across the seam
  const auto wrap = continuousMask(six, "default");
  const Trajectory t = timeParameterize(six, "default", { a, b });
  EXPECT_NEAR(t.duration(), trapezoidDuration(2 * std::numbers::pi - 6.0, 3.0, 2.0), 1e-12);
  for (double time = 0.0; time <= t.duration(); time += 0.01)
  {
    const double q = sampleTrajectory(t, time, wrap).positions[5];
    EXPECT_TRUE(q >= 3.0 - 1e-12 || q <= -3.0 + 1e-12) << q;
  }
}

TEST_F(TrajectoryTest, Errors)
{
  EXPECT_THROW(timeParameterize(model, "default", {}), Error);
  EXPECT_THROW(timeParameterize(model, "default", { Eigen::Vector3d::Zero() }), Error);
  const std::string urdf = R"(<robot name="r">
  <link name="a"/><link name="b"/>
  <joint name="spin" type="continuous"><parent link="a"/><child link="b"/><axis xyz="0 0 1"/></joint>
</robot>)";
  const RobotModel unlimited = parseUrdf(urdf);
  try
  {
    timeParameterize(unlimited, "default", { Eigen::VectorXd::Zero(1) });
    FAIL();
  }
  catch (const Error& e)
  {
    EXPECT_EQ(e.code(), ErrorCode::MissingVelocityLimit);
  }
}

}  // namespace
}  // namespace erupt
