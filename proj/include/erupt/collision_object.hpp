#pragma once

#include <cstdint>
#include <string>

#include "erupt/pose.hpp"
#include "erupt/shapes.hpp"

namespace erupt
{
struct CollisionObject
{
  std::string id;
  Shape shape;
  Pose pose;
  /// Scene version at which the object was last written.
  std::uint64_t revision = 0;

  bool operator==(const CollisionObject& other) const = default;
};

}  // namespace erupt
