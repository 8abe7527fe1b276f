#pragma once

#include <string>

#include <Eigen/Core>

namespace erupt
{
/// Positions of a group's actuated joints, base to tip. Radians for
/// revolute/continuous joints, meters for prismatic ones.
struct JointState
{
  std::string group;
  Eigen::VectorXd positions;

  JointState() = default;
  JointState(std::string g, Eigen::VectorXd p) : group(std::move(g)), positions(std::move(p))
  {
  }

  Eigen::Index size() const
  {
    return positions.size();
  }

  bool operator==(const JointState& other) const
  {
    return group == other.group && positions.size() == other.positions.size() && positions == other.positions;
  }
};

}  // namespace erupt
