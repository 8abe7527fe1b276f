#pragma once

#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "erupt/joint_state.hpp"
#include "erupt/planning_scene.hpp"
#include "erupt/pose.hpp"
#include "erupt/robot_model.hpp"
#include "erupt/trajectory.hpp"

namespace erupt
{
struct PoseGoal
{
  Pose pose;
  double position_tolerance = 1e-4;
  double orientation_tolerance = 1e-3;
  /// Ignore orientation when solving for the goal state.
  bool position_only = false;

  bool operator==(const PoseGoal& other) const = default;
};

using Goal = std::variant<JointState, PoseGoal>;

inline constexpr std::string_view kRrtConnect = "rrt_connect";
inline constexpr std::string_view kPrm = "prm";

/// Planner ids accepted in requests.
const std::vector<std::string>& plannerIds();

struct MotionPlanRequest
{
  std::string group = "default";
  JointState start;
  Goal goal;
  std::string planner_id = std::string(kRrtConnect);
  int num_attempts = 1;
  double max_planning_time = 5.0;
  double edge_step = 0.05;
  int shortcut_iterations = 100;
  std::optional<std::uint64_t> seed;

  /// Throws Error(InvalidArgument) or Error(UnknownPlanner).
  void validate() const;
  bool operator==(const MotionPlanRequest& other) const = default;
};

enum class PlanStatus
{
  Success,
  InvalidStartState,
  InvalidGoalState,
  GoalUnreachableIk,
  TimedOut,
  PlanningFailed,
};

std::string_view planStatusName(PlanStatus status);
PlanStatus planStatusFromName(std::string_view name);

struct MotionPlanResponse
{
  PlanStatus status = PlanStatus::PlanningFailed;
  std::optional<std::vector<JointState>> path;
  std::optional<Trajectory> trajectory;
  double planning_time = 0.0;
  std::size_t waypoint_count = 0;
  /// Human-readable detail for failures; empty on success.
  std::string message;

  bool success() const
  {
    return status == PlanStatus::Success;
  }
  bool operator==(const MotionPlanResponse& other) const = default;
};

/// Full pipeline: start validation, pose-goal IK, goal validation, planning
/// attempts within the shared time budget, shortcutting and time
/// parameterization. Never throws; problems are reported through status.
MotionPlanResponse plan(const MotionPlanRequest& request, const SceneState& scene, const RobotModel& model,
                        std::stop_token stop = {});

}  // namespace erupt
