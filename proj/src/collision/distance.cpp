#include "erupt/collision/distance.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "erupt/collision/gjk.hpp"

namespace erupt
{
namespace geometry
{
double pointSegmentSquaredDistance(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b)
{
  const Eigen::Vector3d ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).squaredNorm();
}

double segmentSegmentSquaredDistance(const Eigen::Vector3d& p1, const Eigen::Vector3d& q1, const Eigen::Vector3d& p2,
                                     const Eigen::Vector3d& q2)
{
  const Eigen::Vector3d d1 = q1 - p1;
  const Eigen::Vector3d d2 = q2 - p2;
  const Eigen::Vector3d r = p1 - p2;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  constexpr double eps = 1e-18;
  double s = 0.0;
  double t = 0.0;
  if (a <= eps && e <= eps)
    return r.squaredNorm();
  if (a <= eps)
  {
    t = std::clamp(f / e, 0.0, 1.0);
  }
  else
  {
    const double c = d1.dot(r);
    if (e <= eps)
    {
      s = std::clamp(-c / a, 0.0, 1.0);
    }
    else
    {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > eps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0)
      {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      }
      else if (t > 1.0)
      {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return (p1 + d1 * s - (p2 + d2 * t)).squaredNorm();
}
}  // namespace geometry

namespace
{
int kindRank(ShapeKind kind)
{
  switch (kind)
  {
    case ShapeKind::Sphere:
      return 0;
    case ShapeKind::Capsule:
      return 1;
    case ShapeKind::Box:
      return 2;
    case ShapeKind::Cylinder:
      return 3;
  }
  return 4;
}

auto orderKey(const Shape& s, const Eigen::Isometry3d& t)
{
  const Eigen::Vector3d p = t.translation();
  const Eigen::Matrix3d& r = t.linear();
  return std::make_tuple(kindRank(s.kind), s.radius, s.half_length, s.half_extents.x(), s.half_extents.y(),
                         s.half_extents.z(), p.x(), p.y(), p.z(), r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1), r(1, 2),
                         r(2, 0), r(2, 1), r(2, 2));
}

void segmentEnds(const Shape& s, const Eigen::Isometry3d& t, Eigen::Vector3d& p, Eigen::Vector3d& q)
{
  const Eigen::Vector3d axis = t.linear().col(2) * s.half_length;
  p = t.translation() - axis;
  q = t.translation() + axis;
}

double sphereBox(const Shape& sphere, const Eigen::Isometry3d& ts, const Shape& box, const Eigen::Isometry3d& tb)
{
  const Eigen::Vector3d p = tb.inverse() * ts.translation();
  const Eigen::Vector3d& h = box.half_extents;
  const bool inside = (p.cwiseAbs().array() <= h.array()).all();
  if (inside)
  {
    const double depth = (h - p.cwiseAbs()).minCoeff();
    return -(depth + sphere.radius);
  }
  const Eigen::Vector3d q = p.cwiseMax(-h).cwiseMin(h);
  return (p - q).norm() - sphere.radius;
}

double orderedDistance(const Shape& a, const Eigen::Isometry3d& ta, const Shape& b, const Eigen::Isometry3d& tb)
{
  using K = ShapeKind;
  if (a.kind == K::Sphere && b.kind == K::Sphere)
    return (ta.translation() - tb.translation()).norm() - a.radius - b.radius;
  if (a.kind == K::Sphere && b.kind == K::Capsule)
  {
    Eigen::Vector3d p, q;
    segmentEnds(b, tb, p, q);
    return std::sqrt(geometry::pointSegmentSquaredDistance(ta.translation(), p, q)) - a.radius - b.radius;
  }
  if (a.kind == K::Capsule && b.kind == K::Capsule)
  {
    Eigen::Vector3d p1, q1, p2, q2;
    segmentEnds(a, ta, p1, q1);
    segmentEnds(b, tb, p2, q2);
    return std::sqrt(geometry::segmentSegmentSquaredDistance(p1, q1, p2, q2)) - a.radius - b.radius;
  }
  if (a.kind == K::Sphere && b.kind == K::Box)
    return sphereBox(a, ta, b, tb);

  const collision::ConvexShape ca{ a, ta };
  const collision::ConvexShape cb{ b, tb };
  const collision::GjkResult core = collision::gjkCoreDistance(ca, cb);
  constexpr double core_contact = 1e-9;
  if (!core.intersecting && core.distance > core_contact)
    return core.distance - ca.margin() - cb.margin();
  // Point and segment cores can always be separated by an infinitesimal
  // move, so only shapes with volumetric cores need the polytope expansion.
  const bool thin_a = a.kind == K::Sphere || a.kind == K::Capsule;
  const bool thin_b = b.kind == K::Sphere || b.kind == K::Capsule;
  if (thin_a && thin_b)
    return core.distance - ca.margin() - cb.margin();
  return -collision::epaPenetrationDepth(ca, cb);
}
}  // namespace

double shapeDistance(const Shape& a, const Eigen::Isometry3d& pose_a, const Shape& b, const Eigen::Isometry3d& pose_b)
{
  if (orderKey(b, pose_b) < orderKey(a, pose_a))
    return orderedDistance(b, pose_b, a, pose_a);
  return orderedDistance(a, pose_a, b, pose_b);
}

double shapeDistance(const Shape& a, const Pose& pose_a, const Shape& b, const Pose& pose_b)
{
  return shapeDistance(a, pose_a.isometry(), b, pose_b.isometry());
}

Eigen::AlignedBox3d worldAabb(const Shape& shape, const Eigen::Isometry3d& pose)
{
  const Eigen::Matrix3d& r = pose.linear();
  Eigen::Vector3d half;
  switch (shape.kind)
  {
    case ShapeKind::Box:
      half = r.cwiseAbs() * shape.half_extents;
      break;
    case ShapeKind::Sphere:
      half = Eigen::Vector3d::Constant(shape.radius);
      break;
    case ShapeKind::Capsule:
      half = r.col(2).cwiseAbs() * shape.half_length + Eigen::Vector3d::Constant(shape.radius);
      break;
    case ShapeKind::Cylinder: {
      const Eigen::Vector3d axis = r.col(2);
      for (int i = 0; i < 3; ++i)
        half[i] = shape.half_length * std::abs(axis[i]) + shape.radius * std::sqrt(std::max(0.0, 1.0 - axis[i] * axis[i]));
      break;
    }
  }
  return Eigen::AlignedBox3d(pose.translation() - half, pose.translation() + half);
}

bool containsPoint(const Shape& shape, const Eigen::Isometry3d& pose, const Eigen::Vector3d& point)
{
  const Eigen::Vector3d p = pose.inverse() * point;
  switch (shape.kind)
  {
    case ShapeKind::Box:
      return (p.cwiseAbs().array() <= shape.half_extents.array()).all();
    case ShapeKind::Sphere:
      return p.squaredNorm() <= shape.radius * shape.radius;
    case ShapeKind::Cylinder:
      return std::abs(p.z()) <= shape.half_length && p.head<2>().squaredNorm() <= shape.radius * shape.radius;
    case ShapeKind::Capsule: {
      const double z = std::clamp(p.z(), -shape.half_length, shape.half_length);
      return (p - Eigen::Vector3d(0, 0, z)).squaredNorm() <= shape.radius * shape.radius;
    }
  }
  return false;
}

}  // namespace erupt
