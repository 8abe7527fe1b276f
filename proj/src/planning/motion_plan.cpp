#include "erupt/motion_plan.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "erupt/collision/robot_collision.hpp"
#include "erupt/error.hpp"
#include "erupt/kinematics.hpp"
#include "erupt/planners.hpp"

namespace erupt
{
const std::vector<std::string>& plannerIds()
{
  static const std::vector<std::string> ids{ std::string(kRrtConnect), std::string(kPrm) };
  return ids;
}

void MotionPlanRequest::validate() const
{
  if (std::find(plannerIds().begin(), plannerIds().end(), planner_id) == plannerIds().end())
    throw Error(ErrorCode::UnknownPlanner, "unknown planner '" + planner_id + "'");
  if (num_attempts < 1)
    throw Error(ErrorCode::InvalidArgument, "num_attempts must be at least 1");
  if (!(max_planning_time > 0.0))
    throw Error(ErrorCode::InvalidArgument, "max_planning_time must be positive");
  if (!(edge_step > 0.0))
    throw Error(ErrorCode::InvalidArgument, "edge_step must be positive");
  if (shortcut_iterations < 0)
    throw Error(ErrorCode::InvalidArgument, "shortcut_iterations must not be negative");
  if (const auto* pg = std::get_if<PoseGoal>(&goal))
    if (!(pg->position_tolerance > 0.0) || !(pg->orientation_tolerance > 0.0))
      throw Error(ErrorCode::InvalidArgument, "pose goal tolerances must be positive");
}

std::string_view planStatusName(PlanStatus status)
{
  switch (status)
  {
    case PlanStatus::Success:
      return "SUCCESS";
    case PlanStatus::InvalidStartState:
      return "INVALID_START_STATE";
    case PlanStatus::InvalidGoalState:
      return "INVALID_GOAL_STATE";
    case PlanStatus::GoalUnreachableIk:
      return "GOAL_UNREACHABLE_IK";
    case PlanStatus::TimedOut:
      return "TIMED_OUT";
    case PlanStatus::PlanningFailed:
      return "PLANNING_FAILED";
  }
  return "PLANNING_FAILED";
}

PlanStatus planStatusFromName(std::string_view name)
{
  for (PlanStatus s : { PlanStatus::Success, PlanStatus::InvalidStartState, PlanStatus::InvalidGoalState,
                        PlanStatus::GoalUnreachableIk, PlanStatus::TimedOut, PlanStatus::PlanningFailed })
    if (planStatusName(s) == name)
      return s;
  throw Error(ErrorCode::InvalidMessage, "unknown plan status '" + std::string(name) + "'");
}

namespace
{
constexpr int kIkAttempts = 10;

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Why a joint state cannot be used as a start or goal, or empty if it can.
std::string stateProblem(const RobotModel& model, const CollisionChecker& checker, const std::string& group,
                         const JointState& q)
{
  if (static_cast<std::size_t>(q.positions.size()) != checker.dimension())
    return "dimension " + std::to_string(q.positions.size()) + " does not match group '" + group + "' (" +
           std::to_string(checker.dimension()) + ")";
  if (!q.group.empty() && q.group != group)
    return "state is for group '" + q.group + "', request is for '" + group + "'";
  if (!withinLimits(model, group, q.positions, 1e-12))
    return "outside joint limits";
  if (!checker.isValid(q.positions))
    return "in collision";
  return {};
}

struct Attempt
{
  bool success = false;
  bool timed_out = false;
  bool cancelled = false;
  Path path;
};

bool pathValidAt(const CollisionChecker& checker, const Path& path, double step)
{
  for (std::size_t i = 1; i < path.size(); ++i)
    if (!checker.segmentValid(path[i - 1], path[i], step))
      return false;
  return true;
}
}  // namespace

MotionPlanResponse plan(const MotionPlanRequest& request, const SceneState& scene, const RobotModel& model,
                        std::stop_token stop)
{
  const Clock::time_point t0 = Clock::now();
  MotionPlanResponse response;
  auto finish = [&](PlanStatus status, std::string message) {
    response.status = status;
    response.message = std::move(message);
    response.planning_time = secondsSince(t0);
    return response;
  };

  try
  {
    request.validate();
    const std::string& group = request.group;
    if (!model.hasGroup(group))
      return finish(PlanStatus::PlanningFailed, "unknown group '" + group + "'");
    const CollisionChecker checker(model, group, scene.objectList());
    const std::uint64_t seed = request.seed.value_or(std::random_device{}());

    if (std::string why = stateProblem(model, checker, group, request.start); !why.empty())
      return finish(PlanStatus::InvalidStartState, "start state " + why);

    JointState goal;
    if (const auto* joint_goal = std::get_if<JointState>(&request.goal))
    {
      goal = *joint_goal;
      if (std::string why = stateProblem(model, checker, group, goal); !why.empty())
        return finish(PlanStatus::InvalidGoalState, "goal state " + why);
    }
    else
    {
      const PoseGoal& pg = std::get<PoseGoal>(request.goal);
      IkParams ik;
      ik.position_tolerance = pg.position_tolerance;
      ik.orientation_tolerance = pg.orientation_tolerance;
      if (pg.position_only)
        ik.orientation_weight = 0.0;
      std::mt19937_64 ik_rng(seed ^ 0x9e3779b97f4a7c15ULL);
      bool solved = false;
      bool found_colliding = false;
      for (int attempt = 0; attempt < kIkAttempts && !solved; ++attempt)
      {
        const JointState seed_state = attempt == 0 ? request.start : randomState(model, group, ik_rng);
        const IkResult r = inverseKinematics(model, group, pg.pose, seed_state, ik);
        if (r.status == IkStatus::UnreachableHint)
          return finish(PlanStatus::GoalUnreachableIk, "target is beyond the reach of the arm");
        if (!r.success())
          continue;
        if (checker.isValid(r.state.positions))
        {
          goal = r.state;
          solved = true;
        }
        else
        {
          found_colliding = true;
        }
      }
      if (!solved)
        return found_colliding ? finish(PlanStatus::InvalidGoalState, "every IK solution is in collision")
                               : finish(PlanStatus::GoalUnreachableIk, "IK did not converge");
    }

    PlannerBudget budget;
    budget.deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(request.max_planning_time));
    budget.stop = stop;
    const StateSpace space(checker, request.edge_step);

    Attempt found;
    bool any_timeout = false;
    for (int attempt = 0; attempt < request.num_attempts && !found.success; ++attempt)
    {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
      PlannerResult r = request.planner_id == kPrm ? prm(space, request.start.positions, goal.positions, {}, rng, budget)
                                                   : rrtConnect(space, request.start.positions, goal.positions, {}, rng, budget);
      if (r.outcome == PlannerOutcome::Cancelled)
        return finish(PlanStatus::PlanningFailed, "cancelled");
      if (r.outcome == PlannerOutcome::TimedOut)
      {
        any_timeout = true;
        break;
      }
      if (r.outcome != PlannerOutcome::Success)
        continue;

      Path path = shortcutPath(space, r.path, static_cast<std::size_t>(request.shortcut_iterations), rng, budget);
      // Accept only paths that also hold at twice the checking resolution.
      if (!pathValidAt(checker, path, 0.5 * request.edge_step))
      {
        if (pathValidAt(checker, r.path, 0.5 * request.edge_step))
          path = r.path;
        else
          continue;
      }
      found.success = true;
      found.path = std::move(path);
    }
    if (stop.stop_requested())
      return finish(PlanStatus::PlanningFailed, "cancelled");
    if (!found.success)
      return any_timeout ? finish(PlanStatus::TimedOut, "no path within " + std::to_string(request.max_planning_time) + " s")
                         : finish(PlanStatus::PlanningFailed, "no path found in " + std::to_string(request.num_attempts) +
                                                                  " attempt(s)");

    Trajectory trajectory = timeParameterize(model, group, found.path);
    std::vector<JointState> states;
    states.reserve(found.path.size());
    for (const auto& q : found.path)
      states.emplace_back(group, q);
    response.waypoint_count = states.size();
    response.path = std::move(states);
    response.trajectory = std::move(trajectory);
    return finish(PlanStatus::Success, {});
  }
  catch (const Error& e)
  {
    response.path.reset();
    response.trajectory.reset();
    response.waypoint_count = 0;
    return finish(PlanStatus::PlanningFailed, std::string(error_code_name(e.code())) + ": " + e.what());
  }
  catch (const std::exception& e)
  {
    response.path.reset();
    response.trajectory.reset();
    response.waypoint_count = 0;
    return finish(PlanStatus::PlanningFailed, e.what());
  }
}

}  // namespace erupt
