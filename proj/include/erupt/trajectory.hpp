#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "erupt/robot_model.hpp"

namespace erupt
{
struct TrajectoryPoint
{
  double time_from_start = 0.0;
  Eigen::VectorXd positions;
  Eigen::VectorXd velocities;

  bool operator==(const TrajectoryPoint& other) const
  {
    return time_from_start == other.time_from_start && positions.size() == other.positions.size() &&
           positions == other.positions && velocities.size() == other.velocities.size() &&
           velocities == other.velocities;
  }
};

struct Trajectory
{
  std::string group;
  std::vector<TrajectoryPoint> points;

  double duration() const
  {
    return points.empty() ? 0.0 : points.back().time_from_start;
  }
  bool operator==(const Trajectory& other) const = default;
};

inline constexpr double kDefaultAcceleration = 2.0;

/// Rest-to-rest trapezoidal profile along each straight segment of `path`.
/// Each segment runs as fast as the most constrained joint allows under its
/// velocity limit and `acceleration`. Output points are the waypoints plus
/// the phase boundaries, so positions at waypoint times equal the waypoints.
/// Throws Error(MissingVelocityLimit), Error(DimensionMismatch) or
/// Error(InvalidArgument) for an empty path.
Trajectory timeParameterize(const RobotModel& model, const std::string& group, const std::vector<Eigen::VectorXd>& path,
                            double acceleration = kDefaultAcceleration);

struct TrajectorySample
{
  Eigen::VectorXd positions;
  Eigen::VectorXd velocities;
};

/// State at time t (clamped to the trajectory span) by cubic Hermite
/// interpolation between neighbouring points. Joints flagged in `wrap` are
/// interpolated on the shortest arc and wrapped into (-pi, pi]. Exact at the
/// stored points; exact for constant-acceleration phases.
TrajectorySample sampleTrajectory(const Trajectory& trajectory, double t, const std::vector<std::uint8_t>& wrap = {});

/// Wrap mask of a group's actuated joints (1 for continuous joints).
std::vector<std::uint8_t> continuousMask(const RobotModel& model, const std::string& group);

}  // namespace erupt
