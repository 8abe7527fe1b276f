#pragma once

#include <string>
#include <string_view>

#include <Eigen/Core>

namespace erupt
{
enum class ShapeKind
{
  Box,
  Sphere,
  Cylinder,
  Capsule,
};

std::string_view shapeKindName(ShapeKind kind);
ShapeKind shapeKindFromName(std::string_view name);  // throws Error(InvalidShape)

/// Primitive collision shape centered at its frame origin. Cylinders and
/// capsules are aligned with the local z axis.
struct Shape
{
  ShapeKind kind = ShapeKind::Sphere;
  Eigen::Vector3d half_extents = Eigen::Vector3d::Zero();  // box only
  double radius = 0.0;                                      // sphere, cylinder, capsule
  double half_length = 0.0;                                 // cylinder, capsule

  static Shape box(const Eigen::Vector3d& half_extents);
  static Shape sphere(double radius);
  static Shape cylinder(double radius, double half_length);
  static Shape capsule(double radius, double half_length);

  bool valid() const;
  /// Throws Error(InvalidShape) when any dimension is not strictly positive.
  void validate() const;

  /// Radius of the bounding sphere around the local origin.
  double boundingRadius() const;
  /// Half extents of the local-frame bounding box.
  Eigen::Vector3d localHalfExtents() const;
  double volume() const;

  bool operator==(const Shape& other) const;
};

}  // namespace erupt
