#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "erupt/joint_state.hpp"
#include "erupt/pose.hpp"
#include "erupt/robot_model.hpp"

namespace erupt
{
struct FkResult
{
  Pose tip;
  /// World pose of the group's base link and every link along the chain.
  std::map<std::string, Pose> per_link;
};

/// Throws Error(UnknownGroup) or Error(DimensionMismatch).
FkResult forwardKinematics(const RobotModel& model, const std::string& group, const JointState& q);

/// World transforms of every link in the model, indexed like model.links().
/// Actuated joints outside `group` sit at their neutral position.
std::vector<Eigen::Isometry3d> linkTransforms(const RobotModel& model, const std::string& group,
                                              const Eigen::VectorXd& q);

/// Tip pose of `group`, composing only the group's chain (base link at the identity).
Eigen::Isometry3d chainTransform(const RobotModel& model, const Group& group, const Eigen::VectorXd& q);

/// Motion of a single joint at coordinate `value`, in the joint frame.
Eigen::Isometry3d jointMotion(const Joint& joint, double value);

/// 6 x n geometric Jacobian of the tip origin (linear rows first), in the
/// world frame. Throws as forwardKinematics.
Eigen::MatrixXd jacobian(const RobotModel& model, const std::string& group, const JointState& q);

struct IkParams
{
  int max_iterations = 200;
  double position_tolerance = 1e-4;
  double orientation_tolerance = 1e-3;
  double damping = 0.05;
  double step_scale = 0.5;
  /// 0 solves for position only.
  double orientation_weight = 1.0;

  /// Throws Error(InvalidArgument) when a field is out of range.
  void validate() const;
};

enum class IkStatus
{
  Success,
  NoConvergence,
  UnreachableHint,
};

std::string_view ikStatusName(IkStatus status);

struct IkResult
{
  IkStatus status = IkStatus::NoConvergence;
  /// Solution on success, best-so-far state otherwise.
  JointState state;
  double position_residual = 0.0;
  double orientation_residual = 0.0;
  int iterations = 0;

  bool success() const
  {
    return status == IkStatus::Success;
  }
};

/// Damped least squares: dq = step_scale * J^T (J J^T + damping^2 I)^-1 e,
/// with e = (position error; orientation_weight * rotation-vector error).
/// The state is clamped into limits after every step. Success is only
/// reported after re-checking the tolerances with forward kinematics.
IkResult inverseKinematics(const RobotModel& model, const std::string& group, const Pose& target,
                           const JointState& seed, const IkParams& params = {});

/// Upper bound on the distance from the first actuated joint to the tip.
double chainReach(const RobotModel& model, const std::string& group);

/// Uniform sample within limits (continuous joints over (-pi, pi]).
JointState randomState(const RobotModel& model, const std::string& group, std::mt19937_64& rng);

/// Runs IK from `seed`, then from up to `restarts` uniform random seeds
/// while the result is NoConvergence. Returns the best attempt.
IkResult inverseKinematicsWithRestarts(const RobotModel& model, const std::string& group, const Pose& target,
                                       const JointState& seed, const IkParams& params, int restarts,
                                       std::mt19937_64& rng);

}  // namespace erupt
