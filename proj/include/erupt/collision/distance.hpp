#pragma once

#include <Eigen/Geometry>

#include "erupt/pose.hpp"
#include "erupt/shapes.hpp"

namespace erupt
{
/// Signed distance between two shapes: positive separation, negative
/// penetration depth. Sphere/capsule pairs and sphere-box are analytic; the
/// remaining pairs go through GJK, with EPA only when the shapes overlap.
/// The result does not depend on argument order.
double shapeDistance(const Shape& a, const Pose& pose_a, const Shape& b, const Pose& pose_b);

double shapeDistance(const Shape& a, const Eigen::Isometry3d& pose_a, const Shape& b, const Eigen::Isometry3d& pose_b);

/// World-frame axis-aligned bounding box of a posed shape.
Eigen::AlignedBox3d worldAabb(const Shape& shape, const Eigen::Isometry3d& pose);

/// True when `point` (world frame) lies inside the posed shape.
bool containsPoint(const Shape& shape, const Eigen::Isometry3d& pose, const Eigen::Vector3d& point);

namespace geometry
{
/// Closest points between segments [p1,q1] and [p2,q2]; returns the squared distance.
double segmentSegmentSquaredDistance(const Eigen::Vector3d& p1, const Eigen::Vector3d& q1, const Eigen::Vector3d& p2,
                                     const Eigen::Vector3d& q2);
double pointSegmentSquaredDistance(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b);
}  // namespace geometry

}  // namespace erupt
