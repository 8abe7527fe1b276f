#include "erupt/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "erupt/error.hpp"

namespace erupt
{
std::vector<std::uint8_t> continuousMask(const RobotModel& model, const std::string& group)
{
  std::vector<std::uint8_t> mask;
  for (std::size_t j : model.group(group).actuated)
    mask.push_back(model.joints()[j].type == JointType::Continuous ? 1 : 0);
  return mask;
}

namespace
{
Eigen::VectorXd shortestDelta(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const std::vector<std::uint8_t>& wrap)
{
  Eigen::VectorXd d = b - a;
  for (Eigen::Index j = 0; j < d.size(); ++j)
    if (!wrap.empty() && wrap[j])
      d[j] = wrapAngle(d[j]);
  return d;
}

Eigen::VectorXd wrapped(Eigen::VectorXd q, const std::vector<std::uint8_t>& wrap)
{
  for (Eigen::Index j = 0; j < q.size(); ++j)
    if (!wrap.empty() && wrap[j])
      q[j] = wrapAngle(q[j]);
  return q;
}
}  // namespace

Trajectory timeParameterize(const RobotModel& model, const std::string& group, const std::vector<Eigen::VectorXd>& path,
                            double acceleration)
{
  if (path.empty())
    throw Error(ErrorCode::InvalidArgument, "cannot time-parameterize an empty path");
  if (!(acceleration > 0.0))
    throw Error(ErrorCode::InvalidArgument, "acceleration must be positive");
  const Group& g = model.group(group);
  const std::size_t n = g.actuated.size();
  Eigen::VectorXd vmax(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k)
  {
    const Joint& joint = model.joints()[g.actuated[k]];
    if (!joint.limits.max_velocity)
      throw Error(ErrorCode::MissingVelocityLimit, "joint '" + joint.name + "' has no velocity limit");
    vmax[static_cast<Eigen::Index>(k)] = *joint.limits.max_velocity;
  }
  for (const auto& q : path)
    if (static_cast<std::size_t>(q.size()) != n)
      throw Error(ErrorCode::DimensionMismatch, "path waypoint has dimension " + std::to_string(q.size()) +
                                                    ", group '" + group + "' has " + std::to_string(n));
  const std::vector<std::uint8_t> wrap = continuousMask(model, group);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

  Trajectory traj;
  traj.group = group;
  traj.points.push_back({ 0.0, path.front(), zero });
  double t0 = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i)
  {
    const Eigen::VectorXd& a = path[i - 1];
    const Eigen::VectorXd& b = path[i];
    const Eigen::VectorXd delta = shortestDelta(a, b, wrap);
    // The segment is q(s) = a + s * delta for s in [0, 1]. V and A bound
    // ds/dt and d2s/dt2 so that every joint stays inside its limits.
    double V = std::numeric_limits<double>::infinity();
    double A = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < delta.size(); ++j)
    {
      const double m = std::abs(delta[j]);
      if (m > 0.0)
      {
        V = std::min(V, vmax[j] / m);
        A = std::min(A, acceleration / m);
      }
    }
    if (!std::isfinite(V))
      continue;  // repeated waypoint

    auto emit = [&](double t, double s, double sdot) {
      TrajectoryPoint p;
      p.time_from_start = t0 + t;
      p.positions = wrapped(a + s * delta, wrap);
      p.velocities = sdot * delta;
      traj.points.push_back(std::move(p));
    };
    double ta, cruise;
    if (V * V / A >= 1.0)
    {
      ta = std::sqrt(1.0 / A);
      cruise = 0.0;
      emit(ta, 0.5, A * ta);
    }
    else
    {
      ta = V / A;
      const double sa = 0.5 * V * ta;
      cruise = (1.0 - 2.0 * sa) / V;
      emit(ta, sa, V);
      emit(ta + cruise, 1.0 - sa, V);
    }
    const double total = 2.0 * ta + cruise;
    traj.points.push_back({ t0 + total, b, zero });
    t0 += total;
  }
  return traj;
}

TrajectorySample sampleTrajectory(const Trajectory& trajectory, double t, const std::vector<std::uint8_t>& wrap)
{
  if (trajectory.points.empty())
    throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  const auto& pts = trajectory.points;
  if (t <= pts.front().time_from_start)
    return { pts.front().positions, pts.front().velocities };
  if (t >= pts.back().time_from_start)
    return { pts.back().positions, pts.back().velocities };
  auto hi = std::upper_bound(pts.begin(), pts.end(), t,
                             [](double value, const TrajectoryPoint& p) { return value < p.time_from_start; });
  const TrajectoryPoint& p1 = *hi;
  const TrajectoryPoint& p0 = *(hi - 1);
  if (t == p0.time_from_start)
    return { p0.positions, p0.velocities };
  const double h = p1.time_from_start - p0.time_from_start;
  const double u = (t - p0.time_from_start) / h;
  const Eigen::VectorXd d = shortestDelta(p0.positions, p1.positions, wrap);
  const Eigen::VectorXd m0 = h * p0.velocities;
  const Eigen::VectorXd m1 = h * p1.velocities;
  // Hermite basis on the offset from p0.
  const double u2 = u * u, u3 = u2 * u;
  const double h10 = u3 - 2.0 * u2 + u, h01 = -2.0 * u3 + 3.0 * u2, h11 = u3 - u2;
  const double d10 = 3.0 * u2 - 4.0 * u + 1.0, d01 = -6.0 * u2 + 6.0 * u, d11 = 3.0 * u2 - 2.0 * u;
  TrajectorySample s;
  s.positions = wrapped(p0.positions + h10 * m0 + h01 * d + h11 * m1, wrap);
  s.velocities = (d10 * m0 + d01 * d + d11 * m1) / h;
  return s;
}

}  // namespace erupt
