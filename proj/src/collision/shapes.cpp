#include "erupt/shapes.hpp"

#include <cmath>
#include <numbers>

#include "erupt/error.hpp"

namespace erupt
{
std::string_view shapeKindName(ShapeKind kind)
{
  switch (kind)
  {
    case ShapeKind::Box:
      return "box";
    case ShapeKind::Sphere:
      return "sphere";
    case ShapeKind::Cylinder:
      return "cylinder";
    case ShapeKind::Capsule:
      return "capsule";
  }
  return "unknown";
}

ShapeKind shapeKindFromName(std::string_view name)
{
  if (name == "box")
    return ShapeKind::Box;
  if (name == "sphere")
    return ShapeKind::Sphere;
  if (name == "cylinder")
    return ShapeKind::Cylinder;
  if (name == "capsule")
    return ShapeKind::Capsule;
  throw Error(ErrorCode::InvalidShape, "unknown shape kind '" + std::string(name) + "'");
}

Shape Shape::box(const Eigen::Vector3d& half_extents)
{
  Shape s;
  s.kind = ShapeKind::Box;
  s.half_extents = half_extents;
  return s;
}

Shape Shape::sphere(double radius)
{
  Shape s;
  s.kind = ShapeKind::Sphere;
  s.radius = radius;
  return s;
}

Shape Shape::cylinder(double radius, double half_length)
{
  Shape s;
  s.kind = ShapeKind::Cylinder;
  s.radius = radius;
  s.half_length = half_length;
  return s;
}

Shape Shape::capsule(double radius, double half_length)
{
  Shape s;
  s.kind = ShapeKind::Capsule;
  s.radius = radius;
  s.half_length = half_length;
  return s;
}

bool Shape::valid() const
{
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  switch (kind)
  {
    case ShapeKind::Box:
      return positive(half_extents.x()) && positive(half_extents.y()) && positive(half_extents.z());
    case ShapeKind::Sphere:
      return positive(radius);
    case ShapeKind::Cylinder:
    case ShapeKind::Capsule:
      return positive(radius) && positive(half_length);
  }
  return false;
}

void Shape::validate() const
{
  if (!valid())
    throw Error(ErrorCode::InvalidShape,
                std::string("shape '") + std::string(shapeKindName(kind)) + "' has non-positive dimensions");
}

double Shape::boundingRadius() const
{
  switch (kind)
  {
    case ShapeKind::Box:
      return half_extents.norm();
    case ShapeKind::Sphere:
      return radius;
    case ShapeKind::Cylinder:
      return std::hypot(radius, half_length);
    case ShapeKind::Capsule:
      return radius + half_length;
  }
  return 0.0;
}

Eigen::Vector3d Shape::localHalfExtents() const
{
  switch (kind)
  {
    case ShapeKind::Box:
      return half_extents;
    case ShapeKind::Sphere:
      return Eigen::Vector3d::Constant(radius);
    case ShapeKind::Cylinder:
      return Eigen::Vector3d(radius, radius, half_length);
    case ShapeKind::Capsule:
      return Eigen::Vector3d(radius, radius, half_length + radius);
  }
  return Eigen::Vector3d::Zero();
}

double Shape::volume() const
{
  constexpr double pi = std::numbers::pi;
  switch (kind)
  {
    case ShapeKind::Box:
      return 8.0 * half_extents.prod();
    case ShapeKind::Sphere:
      return 4.0 / 3.0 * pi * radius * radius * radius;
    case ShapeKind::Cylinder:
      return pi * radius * radius * 2.0 * half_length;
    case ShapeKind::Capsule:
      return pi * radius * radius * 2.0 * half_length + 4.0 / 3.0 * pi * radius * radius * radius;
  }
  return 0.0;
}

bool Shape::operator==(const Shape& other) const
{
  if (kind != other.kind)
    return false;
  switch (kind)
  {
    case ShapeKind::Box:
      return half_extents == other.half_extents;
    case ShapeKind::Sphere:
      return radius == other.radius;
    case ShapeKind::Cylinder:
    case ShapeKind::Capsule:
      return radius == other.radius && half_length == other.half_length;
  }
  return false;
}

}  // namespace erupt
