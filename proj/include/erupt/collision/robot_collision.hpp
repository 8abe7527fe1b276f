#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "erupt/collision_object.hpp"
#include "erupt/joint_state.hpp"
#include "erupt/robot_model.hpp"

namespace erupt
{
struct CollisionOptions
{
  bool self_collision = true;
  /// Added clearance: pairs closer than this count as colliding.
  double padding = 0.0;
};

struct Contact
{
  std::string link;
  /// Scene object id, or the other link name for self-collision contacts.
  std::string other;
  bool self = false;
  double penetration_depth = 0.0;
};

struct CollisionReport
{
  bool in_collision = false;
  std::vector<Contact> contacts;
  /// Smallest padded link-object distance; infinity when there are no objects.
  double min_clearance = std::numeric_limits<double>::infinity();
};

/// Collision queries for one group against a fixed set of objects. Holds its
/// own copy of the objects, so it is a consistent snapshot; all queries are
/// const and safe to call concurrently.
class CollisionChecker
{
public:
  static constexpr double kBroadPhaseMargin = 0.1;

  CollisionChecker(const RobotModel& model, std::string group, std::vector<CollisionObject> objects,
                   CollisionOptions options = {});

  const RobotModel& model() const
  {
    return model_;
  }
  const std::string& group() const
  {
    return group_;
  }
  std::size_t dimension() const
  {
    return dimension_;
  }
  const std::vector<std::uint8_t>& wrapMask() const
  {
    return wrap_;
  }

  /// Collision-free test with broad-phase culling. Throws Error(DimensionMismatch).
  bool isValid(const Eigen::VectorXd& q) const;

  /// Full report: every link-object pair gets an exact distance.
  CollisionReport report(const Eigen::VectorXd& q) const;

  /// True iff every state on the straight joint-space segment, sampled by
  /// dyadic subdivision until no joint moves more than `step` between
  /// samples, is collision-free (endpoints included). Continuous joints move
  /// along the shortest arc.
  bool segmentValid(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double step) const;

  /// Interpolated state at fraction t along the segment.
  Eigen::VectorXd interpolate(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double t) const;
  /// Per-joint difference b - a, shortest arc for continuous joints.
  Eigen::VectorXd difference(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

private:
  struct LinkGeometry
  {
    std::size_t link;
    Shape shape;
    Eigen::Isometry3d offset;
  };

  void checkDimension(const Eigen::VectorXd& q) const;
  std::vector<Eigen::Isometry3d> geometryPoses(const Eigen::VectorXd& q) const;

  const RobotModel& model_;
  std::string group_;
  std::size_t dimension_;
  std::vector<std::uint8_t> wrap_;
  std::vector<CollisionObject> objects_;
  std::vector<Eigen::Isometry3d> object_poses_;
  std::array<std::vector<double>, 6> object_bounds_;  // min xyz, max xyz
  CollisionOptions options_;
  std::vector<LinkGeometry> geometries_;
  std::vector<std::pair<std::size_t, std::size_t>> self_pairs_;
};

/// Throws Error(DimensionMismatch) or Error(UnknownGroup).
CollisionReport robotInCollision(const RobotModel& model, const JointState& q, std::span<const CollisionObject> objects,
                                 const CollisionOptions& options = {});

bool segmentValid(const RobotModel& model, const JointState& a, const JointState& b,
                  std::span<const CollisionObject> objects, double step, const CollisionOptions& options = {});

}  // namespace erupt
