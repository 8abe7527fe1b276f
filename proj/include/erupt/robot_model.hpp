#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "erupt/joint_state.hpp"
#include "erupt/pose.hpp"
#include "erupt/shapes.hpp"

namespace erupt
{
enum class JointType
{
  Revolute,
  Prismatic,
  Continuous,
  Fixed,
};

std::string_view jointTypeName(JointType type);

struct JointLimits
{
  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<double> max_velocity;
};

struct Joint
{
  std::string name;
  JointType type = JointType::Fixed;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitX();
  Pose origin;  // parent link frame -> joint frame
  std::string parent_link;
  std::string child_link;
  JointLimits limits;

  bool actuated() const
  {
    return type != JointType::Fixed;
  }
};

struct CollisionGeometry
{
  Shape shape;
  Pose offset;  // link frame -> shape frame
};

struct Link
{
  std::string name;
  std::vector<CollisionGeometry> collision_geometries;
};

/// Serial chain of joints from base_link to tip_link. `chain` holds every
/// joint on the way (fixed ones included) in base->tip order, `actuated`
/// the subset that carries a coordinate in a JointState.
struct Group
{
  std::string name;
  std::string base_link;
  std::string tip_link;
  std::vector<std::size_t> chain;
  std::vector<std::size_t> actuated;
};

/// Immutable kinematic tree. The constructor validates the tree structure,
/// joint invariants, and group chains.
class RobotModel
{
public:
  struct GroupSpec
  {
    std::string name;
    std::string base_link;
    std::string tip_link;
  };

  RobotModel(std::string name, std::vector<Link> links, std::vector<Joint> joints,
             std::vector<GroupSpec> groups = {});

  const std::string& name() const
  {
    return name_;
  }
  const std::vector<Link>& links() const
  {
    return links_;
  }
  const std::vector<Joint>& joints() const
  {
    return joints_;
  }
  const std::string& rootLink() const
  {
    return links_[root_].name;
  }
  std::size_t rootIndex() const
  {
    return root_;
  }
  const std::vector<Group>& groups() const
  {
    return groups_;
  }

  /// Throws Error(UnknownGroup).
  const Group& group(const std::string& name) const;
  bool hasGroup(const std::string& name) const;
  /// First group; the synthesized "default" when the source defined none.
  const std::string& defaultGroupName() const
  {
    return groups_.front().name;
  }

  std::optional<std::size_t> linkIndex(const std::string& name) const;
  std::optional<std::size_t> jointIndex(const std::string& name) const;
  /// Joint whose child is `link`, empty for the root.
  std::optional<std::size_t> parentJoint(std::size_t link) const
  {
    return parent_joint_[link];
  }
  /// Joint indices ordered so that every joint's parent link is reached
  /// before the joint itself (breadth-first from the root).
  const std::vector<std::size_t>& topologicalJoints() const
  {
    return topo_joints_;
  }

  /// Number of actuated joints in a group. Throws Error(UnknownGroup).
  std::size_t dimension(const std::string& group) const;

  /// Value used for actuated joints outside the active group: 0 clamped
  /// into the joint limits.
  double neutralPosition(std::size_t joint) const;

private:
  Group buildGroup(const GroupSpec& spec) const;

  std::string name_;
  std::vector<Link> links_;
  std::vector<Joint> joints_;
  std::vector<Group> groups_;
  std::size_t root_ = 0;
  std::vector<std::optional<std::size_t>> parent_joint_;
  std::vector<std::size_t> topo_joints_;
  std::unordered_map<std::string, std::size_t> link_index_;
  std::unordered_map<std::string, std::size_t> joint_index_;
};

/// Actuated joints of `group` in base->tip order. Throws Error(UnknownGroup).
std::vector<const Joint*> jointChain(const RobotModel& model, const std::string& group);

/// Clamps every coordinate into [lower, upper]; continuous joints are
/// wrapped into (-pi, pi]. Throws Error(DimensionMismatch).
JointState clampToLimits(const RobotModel& model, const std::string& group, const JointState& q);

/// True when every coordinate lies within limits (continuous joints are
/// always within limits).
bool withinLimits(const RobotModel& model, const std::string& group, const Eigen::VectorXd& q, double tolerance = 0.0);

/// Wraps an angle into (-pi, pi].
double wrapAngle(double angle);

}  // namespace erupt
