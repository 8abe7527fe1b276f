#include "erupt/robot_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "erupt/error.hpp"

namespace erupt
{
std::string_view jointTypeName(JointType type)
{
  switch (type)
  {
    case JointType::Revolute:
      return "revolute";
    case JointType::Prismatic:
      return "prismatic";
    case JointType::Continuous:
      return "continuous";
    case JointType::Fixed:
      return "fixed";
  }
  return "unknown";
}

double wrapAngle(double angle)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(angle, two_pi);
  if (r <= -std::numbers::pi)
    r += two_pi;
  else if (r > std::numbers::pi)
    r -= two_pi;
  return r;
}

namespace
{
void validateJoint(const Joint& joint)
{
  if (joint.type == JointType::Fixed)
    return;
  const double norm = joint.axis.norm();
  if (std::abs(norm - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidArgument, "joint '" + joint.name + "' axis is not a unit vector");

  const JointLimits& lim = joint.limits;
  if (joint.type == JointType::Revolute || joint.type == JointType::Prismatic)
  {
    if (!lim.lower || !lim.upper || !lim.max_velocity)
      throw Error(ErrorCode::MissingLimit, "joint '" + joint.name + "' requires lower, upper and velocity limits");
  }
  if (lim.lower && lim.upper && *lim.lower > *lim.upper)
    throw Error(ErrorCode::InvalidArgument, "joint '" + joint.name + "' has lower limit above upper limit");
  if (lim.max_velocity && !(*lim.max_velocity > 0.0))
    throw Error(ErrorCode::InvalidArgument, "joint '" + joint.name + "' has non-positive velocity limit");
}
}  // namespace

RobotModel::RobotModel(std::string name, std::vector<Link> links, std::vector<Joint> joints,
                       std::vector<GroupSpec> groups)
  : name_(std::move(name)), links_(std::move(links)), joints_(std::move(joints))
{
  if (links_.empty())
    throw Error(ErrorCode::InvalidArgument, "robot '" + name_ + "' has no links");

  for (std::size_t i = 0; i < links_.size(); ++i)
  {
    if (!link_index_.emplace(links_[i].name, i).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate link '" + links_[i].name + "'");
    for (const auto& geometry : links_[i].collision_geometries)
      geometry.shape.validate();
  }

  parent_joint_.assign(links_.size(), std::nullopt);
  for (std::size_t j = 0; j < joints_.size(); ++j)
  {
    const Joint& joint = joints_[j];
    if (!joint_index_.emplace(joint.name, j).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate joint '" + joint.name + "'");
    auto parent = link_index_.find(joint.parent_link);
    auto child = link_index_.find(joint.child_link);
    if (parent == link_index_.end())
      throw Error(ErrorCode::DanglingReference,
                  "joint '" + joint.name + "' references unknown parent link '" + joint.parent_link + "'");
    if (child == link_index_.end())
      throw Error(ErrorCode::DanglingReference,
                  "joint '" + joint.name + "' references unknown child link '" + joint.child_link + "'");
    if (parent_joint_[child->second])
      throw Error(ErrorCode::KinematicLoop, "link '" + joint.child_link + "' has more than one parent joint");
    parent_joint_[child->second] = j;
    validateJoint(joint);
  }

  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < links_.size(); ++i)
    if (!parent_joint_[i])
      roots.push_back(i);
  if (roots.size() != 1)
    throw Error(ErrorCode::KinematicLoop, roots.empty() ? "kinematic tree has no root link (cycle)" :
                                                          "kinematic graph has multiple root links");
  root_ = roots.front();

  // Breadth-first traversal in declaration order; links not reached sit on a cycle.
  std::vector<std::vector<std::size_t>> children(links_.size());
  for (std::size_t j = 0; j < joints_.size(); ++j)
    children[link_index_.at(joints_[j].parent_link)].push_back(j);
  std::vector<bool> seen(links_.size(), false);
  std::deque<std::size_t> queue{ root_ };
  seen[root_] = true;
  while (!queue.empty())
  {
    std::size_t link = queue.front();
    queue.pop_front();
    for (std::size_t j : children[link])
    {
      std::size_t child = link_index_.at(joints_[j].child_link);
      if (seen[child])
        throw Error(ErrorCode::KinematicLoop, "cycle through joint '" + joints_[j].name + "'");
      seen[child] = true;
      topo_joints_.push_back(j);
      queue.push_back(child);
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw Error(ErrorCode::KinematicLoop, "kinematic graph contains a cycle disconnected from the root");

  if (groups.empty())
  {
    // Deepest leaf, first in declaration order on ties.
    std::vector<int> depth(links_.size(), 0);
    std::size_t deepest = root_;
    for (std::size_t j : topo_joints_)
    {
      std::size_t child = link_index_.at(joints_[j].child_link);
      depth[child] = depth[link_index_.at(joints_[j].parent_link)] + 1;
      if (depth[child] > depth[deepest])
        deepest = child;
    }
    groups.push_back({ "default", links_[root_].name, links_[deepest].name });
  }
  for (const auto& spec : groups)
  {
    if (hasGroup(spec.name))
      throw Error(ErrorCode::InvalidArgument, "duplicate group '" + spec.name + "'");
    groups_.push_back(buildGroup(spec));
  }
}

Group RobotModel::buildGroup(const GroupSpec& spec) const
{
  auto base = linkIndex(spec.base_link);
  auto tip = linkIndex(spec.tip_link);
  if (!base || !tip)
    throw Error(ErrorCode::DanglingReference, "group '" + spec.name + "' references an unknown link");

  Group group{ spec.name, spec.base_link, spec.tip_link, {}, {} };
  std::size_t link = *tip;
  while (link != *base)
  {
    auto joint = parent_joint_[link];
    if (!joint)
      throw Error(ErrorCode::InvalidArgument,
                  "group '" + spec.name + "': tip '" + spec.tip_link + "' does not descend from '" + spec.base_link + "'");
    group.chain.push_back(*joint);
    link = link_index_.at(joints_[*joint].parent_link);
  }
  std::reverse(group.chain.begin(), group.chain.end());
  for (std::size_t j : group.chain)
    if (joints_[j].actuated())
      group.actuated.push_back(j);
  return group;
}

bool RobotModel::hasGroup(const std::string& name) const
{
  return std::any_of(groups_.begin(), groups_.end(), [&](const Group& g) { return g.name == name; });
}

const Group& RobotModel::group(const std::string& name) const
{
  for (const auto& g : groups_)
    if (g.name == name)
      return g;
  throw Error(ErrorCode::UnknownGroup, "unknown group '" + name + "'");
}

std::optional<std::size_t> RobotModel::linkIndex(const std::string& name) const
{
  auto it = link_index_.find(name);
  if (it == link_index_.end())
    return std::nullopt;
  return it->second;
}

std::optional<std::size_t> RobotModel::jointIndex(const std::string& name) const
{
  auto it = joint_index_.find(name);
  if (it == joint_index_.end())
    return std::nullopt;
  return it->second;
}

std::size_t RobotModel::dimension(const std::string& group_name) const
{
  return group(group_name).actuated.size();
}

double RobotModel::neutralPosition(std::size_t joint) const
{
  const JointLimits& lim = joints_[joint].limits;
  double v = 0.0;
  if (lim.lower)
    v = std::max(v, *lim.lower);
  if (lim.upper)
    v = std::min(v, *lim.upper);
  return v;
}

std::vector<const Joint*> jointChain(const RobotModel& model, const std::string& group)
{
  std::vector<const Joint*> out;
  for (std::size_t j : model.group(group).actuated)
    out.push_back(&model.joints()[j]);
  return out;
}

JointState clampToLimits(const RobotModel& model, const std::string& group, const JointState& q)
{
  const Group& g = model.group(group);
  if (static_cast<std::size_t>(q.positions.size()) != g.actuated.size())
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(g.actuated.size()) + " positions for group '" +
                                                  group + "', got " + std::to_string(q.positions.size()));
  JointState out{ group, q.positions };
  for (std::size_t i = 0; i < g.actuated.size(); ++i)
  {
    const Joint& joint = model.joints()[g.actuated[i]];
    double& v = out.positions[static_cast<Eigen::Index>(i)];
    if (joint.type == JointType::Continuous)
    {
      v = wrapAngle(v);
      continue;
    }
    if (joint.limits.lower)
      v = std::max(v, *joint.limits.lower);
    if (joint.limits.upper)
      v = std::min(v, *joint.limits.upper);
  }
  return out;
}

bool withinLimits(const RobotModel& model, const std::string& group, const Eigen::VectorXd& q, double tolerance)
{
  const Group& g = model.group(group);
  if (static_cast<std::size_t>(q.size()) != g.actuated.size())
    return false;
  for (std::size_t i = 0; i < g.actuated.size(); ++i)
  {
    const Joint& joint = model.joints()[g.actuated[i]];
    const double v = q[static_cast<Eigen::Index>(i)];
    if (!std::isfinite(v))
      return false;
    if (joint.type == JointType::Continuous)
      continue;
    if (joint.limits.lower && v < *joint.limits.lower - tolerance)
      return false;
    if (joint.limits.upper && v > *joint.limits.upper + tolerance)
      return false;
  }
  return true;
}

}  // namespace erupt
