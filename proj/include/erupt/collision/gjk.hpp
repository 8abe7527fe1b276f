#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "erupt/shapes.hpp"

namespace erupt::collision
{
/// A shape split into a convex core and a spherical margin: spheres are a
/// point plus radius, capsules a segment plus radius, boxes and cylinders
/// have zero margin.
struct ConvexShape
{
  Shape shape;
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();

  /// Support point of the core (margin excluded) in the world frame.
  Eigen::Vector3d coreSupport(const Eigen::Vector3d& dir) const;
  /// Support point of the full shape.
  Eigen::Vector3d support(const Eigen::Vector3d& dir) const;
  double margin() const;
};

struct GjkResult
{
  bool intersecting = false;
  double distance = 0.0;
  Eigen::Vector3d point_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d point_b = Eigen::Vector3d::Zero();
  int iterations = 0;
};

/// Distance between the cores of two convex shapes.
GjkResult gjkCoreDistance(const ConvexShape& a, const ConvexShape& b);

/// Penetration depth of two overlapping full shapes (margins included) by
/// the expanding polytope algorithm. Returns 0 for touching shapes.
double epaPenetrationDepth(const ConvexShape& a, const ConvexShape& b);

}  // namespace erupt::collision
