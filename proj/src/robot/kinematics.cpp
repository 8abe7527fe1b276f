#include "erupt/kinematics.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "erupt/error.hpp"

namespace erupt
{
namespace
{
const Group& checkedGroup(const RobotModel& model, const std::string& group, Eigen::Index dimension)
{
  const Group& g = model.group(group);
  if (static_cast<std::size_t>(dimension) != g.actuated.size())
    throw Error(ErrorCode::DimensionMismatch, "group '" + group + "' has " + std::to_string(g.actuated.size()) +
                                                  " actuated joints, got " + std::to_string(dimension) + " positions");
  return g;
}

struct ChainFrames
{
  std::vector<Eigen::Isometry3d> joint_frames;  // world frame of each actuated joint (after origin)
  Eigen::Isometry3d tip = Eigen::Isometry3d::Identity();
};

// World frames of the actuated joints and the tip, with the base link placed
// at `base`.
ChainFrames chainFrames(const RobotModel& model, const Group& group, const Eigen::VectorXd& q,
                        const Eigen::Isometry3d& base)
{
  ChainFrames out;
  out.joint_frames.reserve(group.actuated.size());
  Eigen::Isometry3d t = base;
  Eigen::Index k = 0;
  for (std::size_t j : group.chain)
  {
    const Joint& joint = model.joints()[j];
    t = t * joint.origin.isometry();
    if (joint.actuated())
    {
      out.joint_frames.push_back(t);
      t = t * jointMotion(joint, q[k++]);
    }
  }
  out.tip = t;
  return out;
}

Eigen::Isometry3d baseTransform(const RobotModel& model, const Group& group)
{
  // The base link's world pose with everything above it at neutral.
  auto base = model.linkIndex(group.base_link);
  std::vector<std::size_t> path;
  std::size_t link = *base;
  while (auto j = model.parentJoint(link))
  {
    path.push_back(*j);
    link = *model.linkIndex(model.joints()[*j].parent_link);
  }
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (auto it = path.rbegin(); it != path.rend(); ++it)
  {
    const Joint& joint = model.joints()[*it];
    t = t * joint.origin.isometry();
    if (joint.actuated())
      t = t * jointMotion(joint, model.neutralPosition(*it));
  }
  return t;
}
}  // namespace

Eigen::Isometry3d jointMotion(const Joint& joint, double value)
{
  Eigen::Isometry3d m = Eigen::Isometry3d::Identity();
  switch (joint.type)
  {
    case JointType::Revolute:
    case JointType::Continuous:
      m.linear() = Eigen::AngleAxisd(value, joint.axis).toRotationMatrix();
      break;
    case JointType::Prismatic:
      m.translation() = joint.axis * value;
      break;
    case JointType::Fixed:
      break;
  }
  return m;
}

Eigen::Isometry3d chainTransform(const RobotModel& model, const Group& group, const Eigen::VectorXd& q)
{
  return chainFrames(model, group, q, Eigen::Isometry3d::Identity()).tip;
}

FkResult forwardKinematics(const RobotModel& model, const std::string& group, const JointState& q)
{
  const Group& g = checkedGroup(model, group, q.positions.size());
  FkResult out;
  Eigen::Isometry3d t = baseTransform(model, g);
  out.per_link.emplace(g.base_link, Pose::fromIsometry(t));
  Eigen::Index k = 0;
  for (std::size_t j : g.chain)
  {
    const Joint& joint = model.joints()[j];
    t = t * joint.origin.isometry();
    if (joint.actuated())
      t = t * jointMotion(joint, q.positions[k++]);
    out.per_link.emplace(joint.child_link, Pose::fromIsometry(t));
  }
  out.tip = Pose::fromIsometry(t);
  return out;
}

std::vector<Eigen::Isometry3d> linkTransforms(const RobotModel& model, const std::string& group,
                                              const Eigen::VectorXd& q)
{
  const Group& g = checkedGroup(model, group, q.size());
  std::vector<double> values(model.joints().size());
  for (std::size_t j = 0; j < values.size(); ++j)
    values[j] = model.neutralPosition(j);
  for (std::size_t i = 0; i < g.actuated.size(); ++i)
    values[g.actuated[i]] = q[static_cast<Eigen::Index>(i)];

  std::vector<Eigen::Isometry3d> out(model.links().size(), Eigen::Isometry3d::Identity());
  for (std::size_t j : model.topologicalJoints())
  {
    const Joint& joint = model.joints()[j];
    const std::size_t parent = *model.linkIndex(joint.parent_link);
    const std::size_t child = *model.linkIndex(joint.child_link);
    out[child] = out[parent] * joint.origin.isometry() * jointMotion(joint, values[j]);
  }
  return out;
}

Eigen::MatrixXd jacobian(const RobotModel& model, const std::string& group, const JointState& q)
{
  const Group& g = checkedGroup(model, group, q.positions.size());
  ChainFrames frames = chainFrames(model, g, q.positions, baseTransform(model, g));
  const Eigen::Vector3d tip = frames.tip.translation();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(6, static_cast<Eigen::Index>(g.actuated.size()));
  for (std::size_t i = 0; i < g.actuated.size(); ++i)
  {
    const Joint& joint = model.joints()[g.actuated[i]];
    const Eigen::Isometry3d& frame = frames.joint_frames[i];
    const Eigen::Vector3d z = frame.linear() * joint.axis;
    const auto col = static_cast<Eigen::Index>(i);
    if (joint.type == JointType::Prismatic)
    {
      jac.block<3, 1>(0, col) = z;
    }
    else
    {
      jac.block<3, 1>(0, col) = z.cross(tip - frame.translation());
      jac.block<3, 1>(3, col) = z;
    }
  }
  return jac;
}

void IkParams::validate() const
{
  if (max_iterations <= 0)
    throw Error(ErrorCode::InvalidArgument, "max_iterations must be positive");
  if (!(position_tolerance > 0.0) || !(orientation_tolerance > 0.0))
    throw Error(ErrorCode::InvalidArgument, "IK tolerances must be positive");
  if (!(damping > 0.0))
    throw Error(ErrorCode::InvalidArgument, "damping must be positive");
  if (!(step_scale > 0.0 && step_scale <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "step_scale must be in (0, 1]");
  if (!(orientation_weight >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "orientation_weight must be nonnegative");
}

std::string_view ikStatusName(IkStatus status)
{
  switch (status)
  {
    case IkStatus::Success:
      return "success";
    case IkStatus::NoConvergence:
      return "no_convergence";
    case IkStatus::UnreachableHint:
      return "unreachable";
  }
  return "unknown";
}

double chainReach(const RobotModel& model, const std::string& group)
{
  const Group& g = model.group(group);
  double reach = 0.0;
  bool first_actuated_seen = false;
  for (std::size_t j : g.chain)
  {
    const Joint& joint = model.joints()[j];
    if (first_actuated_seen)
      reach += joint.origin.position.norm();
    if (joint.type == JointType::Prismatic)
      reach += std::max(std::abs(joint.limits.lower.value_or(0.0)), std::abs(joint.limits.upper.value_or(0.0)));
    if (joint.actuated())
      first_actuated_seen = true;
  }
  return reach;
}

namespace
{
struct Residual
{
  Eigen::Matrix<double, 6, 1> error;
  double position = 0.0;
  double orientation = 0.0;
};

Residual residual(const Eigen::Isometry3d& tip, const Pose& target, double orientation_weight)
{
  Residual r;
  const Eigen::Vector3d dp = target.position - tip.translation();
  const Eigen::Vector3d dr = rotationError(Eigen::Quaterniond(tip.linear()), target.orientation);
  r.error.head<3>() = dp;
  r.error.tail<3>() = orientation_weight * dr;
  r.position = dp.norm();
  r.orientation = dr.norm();
  return r;
}

bool converged(const Residual& r, const IkParams& params)
{
  if (r.position >= params.position_tolerance)
    return false;
  return params.orientation_weight == 0.0 || r.orientation < params.orientation_tolerance;
}

double score(const Residual& r, const IkParams& params)
{
  return r.position + params.orientation_weight * r.orientation;
}
}  // namespace

IkResult inverseKinematics(const RobotModel& model, const std::string& group, const Pose& target,
                           const JointState& seed, const IkParams& params)
{
  params.validate();
  const Group& g = checkedGroup(model, group, seed.positions.size());
  const Eigen::Isometry3d base = baseTransform(model, g);

  IkResult result;
  result.state = clampToLimits(model, group, seed);

  if (params.orientation_weight == 0.0)
  {
    // Reach is measured from the first actuated joint, which does not move.
    const ChainFrames frames = chainFrames(model, g, result.state.positions, base);
    if (!frames.joint_frames.empty())
    {
      const double distance = (target.position - frames.joint_frames.front().translation()).norm();
      if (distance > chainReach(model, group) + params.position_tolerance)
      {
        const Residual r = residual(frames.tip, target, 0.0);
        result.status = IkStatus::UnreachableHint;
        result.position_residual = r.position;
        result.orientation_residual = r.orientation;
        return result;
      }
    }
  }

  Eigen::VectorXd q = result.state.positions;
  Eigen::VectorXd best_q = q;
  Residual best;
  double best_score = std::numeric_limits<double>::infinity();
  const Eigen::Matrix<double, 6, 6> damping =
      params.damping * params.damping * Eigen::Matrix<double, 6, 6>::Identity();
  const Eigen::Index n = q.size();
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < n; ++i)
  {
    const Joint& joint = model.joints()[g.actuated[static_cast<std::size_t>(i)]];
    if (joint.type == JointType::Continuous)
      continue;
    if (joint.limits.lower)
      lower[i] = *joint.limits.lower;
    if (joint.limits.upper)
      upper[i] = *joint.limits.upper;
  }

  for (int it = 0; it <= params.max_iterations; ++it)
  {
    const ChainFrames frames = chainFrames(model, g, q, base);
    const Residual r = residual(frames.tip, target, params.orientation_weight);
    if (score(r, params) < best_score)
    {
      best_score = score(r, params);
      best = r;
      best_q = q;
    }
    result.iterations = it;
    if (converged(r, params))
    {
      best = r;
      best_q = q;
      break;
    }
    if (it == params.max_iterations)
      break;

    Eigen::MatrixXd jac = jacobian(model, group, JointState(group, q));
    jac.bottomRows<3>() *= params.orientation_weight;
    // A joint sitting on a limit that the step would push further out drops
    // out of the solve; otherwise clamping eats the step and the rest of the
    // chain never compensates.
    Eigen::VectorXd dq;
    for (Eigen::Index pass = 0; pass <= n; ++pass)
    {
      const Eigen::Matrix<double, 6, 6> jjt = jac * jac.transpose() + damping;
      const Eigen::Matrix<double, 6, 1> y = jjt.ldlt().solve(r.error);
      dq = params.step_scale * (jac.transpose() * y);
      bool pinned = false;
      for (Eigen::Index i = 0; i < n; ++i)
      {
        const bool pushing_out = (q[i] <= lower[i] && dq[i] < 0.0) || (q[i] >= upper[i] && dq[i] > 0.0);
        if (pushing_out && !jac.col(i).isZero())
        {
          jac.col(i).setZero();
          pinned = true;
        }
      }
      if (!pinned)
        break;
    }
    q += dq;
    q = clampToLimits(model, group, JointState(group, q)).positions;
  }

  result.state = JointState(group, best_q);
  // Verify with a fresh forward kinematics pass rather than trusting the loop.
  const FkResult fk = forwardKinematics(model, group, result.state);
  const Residual check = residual(fk.tip.isometry(), target, params.orientation_weight);
  result.position_residual = check.position;
  result.orientation_residual = check.orientation;
  result.status = converged(check, params) ? IkStatus::Success : IkStatus::NoConvergence;
  return result;
}

JointState randomState(const RobotModel& model, const std::string& group, std::mt19937_64& rng)
{
  const Group& g = model.group(group);
  Eigen::VectorXd q(static_cast<Eigen::Index>(g.actuated.size()));
  for (std::size_t i = 0; i < g.actuated.size(); ++i)
  {
    const Joint& joint = model.joints()[g.actuated[i]];
    double lo = -std::numbers::pi;
    double hi = std::numbers::pi;
    if (joint.type != JointType::Continuous)
    {
      lo = joint.limits.lower.value_or(lo);
      hi = joint.limits.upper.value_or(hi);
    }
    std::uniform_real_distribution<double> dist(lo, hi);
    q[static_cast<Eigen::Index>(i)] = lo == hi ? lo : dist(rng);
  }
  return JointState(group, q);
}

IkResult inverseKinematicsWithRestarts(const RobotModel& model, const std::string& group, const Pose& target,
                                       const JointState& seed, const IkParams& params, int restarts,
                                       std::mt19937_64& rng)
{
  IkResult best = inverseKinematics(model, group, target, seed, params);
  for (int i = 0; i < restarts && best.status == IkStatus::NoConvergence; ++i)
  {
    IkResult attempt = inverseKinematics(model, group, target, randomState(model, group, rng), params);
    if (attempt.success() || attempt.position_residual + params.orientation_weight * attempt.orientation_residual <
                                 best.position_residual + params.orientation_weight * best.orientation_residual)
      best = std::move(attempt);
  }
  return best;
}

}  // namespace erupt
