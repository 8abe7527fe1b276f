#pragma once

#include <Eigen/Geometry>

namespace erupt
{
/// Rigid transform with a unit quaternion orientation (w,x,y,z). The
/// quaternion is normalized on construction.
struct Pose
{
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  Pose() = default;
  Pose(const Eigen::Vector3d& p, const Eigen::Quaterniond& q) : position(p), orientation(q.normalized())
  {
  }
  explicit Pose(const Eigen::Vector3d& p) : position(p)
  {
  }

  static Pose fromIsometry(const Eigen::Isometry3d& t)
  {
    return Pose(t.translation(), Eigen::Quaterniond(t.rotation()));
  }

  static Pose fromRpy(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy)
  {
    Eigen::Quaterniond q = Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
                           Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
                           Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX());
    return Pose(xyz, q);
  }

  Eigen::Isometry3d isometry() const
  {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = orientation.toRotationMatrix();
    t.translation() = position;
    return t;
  }

  Pose operator*(const Pose& other) const
  {
    return Pose(position + orientation * other.position, orientation * other.orientation);
  }

  Pose inverse() const
  {
    Eigen::Quaterniond inv = orientation.conjugate();
    return Pose(-(inv * position), inv);
  }

  bool operator==(const Pose& other) const
  {
    return position == other.position && orientation.coeffs() == other.orientation.coeffs();
  }
};

/// Rotation vector of the rotation taking `from` to `to`, expressed in the
/// world frame. The representative with nonnegative scalar part is used so
/// that q and -q give the same answer.
inline Eigen::Vector3d rotationError(const Eigen::Quaterniond& from, const Eigen::Quaterniond& to)
{
  Eigen::Quaterniond d = to * from.conjugate();
  if (d.w() < 0.0)
    d.coeffs() = -d.coeffs();
  Eigen::AngleAxisd aa(d);
  return aa.axis() * aa.angle();
}

}  // namespace erupt
