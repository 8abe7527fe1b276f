#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Geometry>

#include "erupt/robot_model.hpp"

namespace erupt
{
/// Resolves a mesh filename to its local-frame bounding box (before scaling).
using MeshBoundsResolver = std::function<std::optional<Eigen::AlignedBox3d>(const std::string& filename)>;

struct UrdfParseOptions
{
  /// Treat every collision cylinder as a capsule. Individual cylinders can
  /// also opt in with a capsule="true" attribute.
  bool cylinders_as_capsules = false;
  /// Directory relative mesh paths are resolved against.
  std::filesystem::path base_dir;
  /// Overrides the built-in STL/OBJ bounding box reader.
  MeshBoundsResolver mesh_bounds;
};

struct UrdfWarning
{
  std::string element;
  std::string message;
};

/// Parses the supported URDF subset: links with box/sphere/cylinder/capsule
/// collision geometry, revolute/prismatic/continuous/fixed joints, and an
/// optional <group name base_link tip_link/> extension element. Meshes are
/// replaced by their bounding boxes (a warning is recorded); visuals,
/// inertials, transmissions and sensors are ignored.
///
/// Throws Error with MalformedXml, KinematicLoop, MissingLimit or
/// DanglingReference.
RobotModel parseUrdf(std::string_view xml_text, const UrdfParseOptions& options = {},
                     std::vector<UrdfWarning>* warnings = nullptr);

RobotModel loadUrdfFile(const std::filesystem::path& path, UrdfParseOptions options = {},
                        std::vector<UrdfWarning>* warnings = nullptr);

/// Serializes the kinematic tree (links, collision primitives, joints,
/// groups) back to URDF.
std::string writeUrdf(const RobotModel& model);

/// Bounding box of an STL (ASCII or binary) or OBJ file.
std::optional<Eigen::AlignedBox3d> readMeshBounds(const std::filesystem::path& path);

}  // namespace erupt
