#include "erupt/collision/robot_collision.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "erupt/collision/distance.hpp"
#include "erupt/error.hpp"
#include "erupt/kinematics.hpp"
#include "erupt/simd/kernels.hpp"

namespace erupt
{
namespace
{
// Links joined by fixed joints form one rigid body.
std::vector<std::size_t> rigidBodies(const RobotModel& model)
{
  std::vector<std::size_t> body(model.links().size());
  std::iota(body.begin(), body.end(), 0);
  for (std::size_t j : model.topologicalJoints())
  {
    const Joint& joint = model.joints()[j];
    if (joint.type == JointType::Fixed)
      body[*model.linkIndex(joint.child_link)] = body[*model.linkIndex(joint.parent_link)];
  }
  return body;
}
}  // namespace

CollisionChecker::CollisionChecker(const RobotModel& model, std::string group, std::vector<CollisionObject> objects,
                                   CollisionOptions options)
  : model_(model)
  , group_(std::move(group))
  , dimension_(model.dimension(group_))
  , objects_(std::move(objects))
  , options_(options)
{
  for (std::size_t j : model_.group(group_).actuated)
    wrap_.push_back(model_.joints()[j].type == JointType::Continuous ? 1 : 0);

  const double inflate = kBroadPhaseMargin + options_.padding;
  for (auto& bounds : object_bounds_)
    bounds.reserve(objects_.size());
  for (const auto& object : objects_)
  {
    object_poses_.push_back(object.pose.isometry());
    const Eigen::AlignedBox3d box = worldAabb(object.shape, object_poses_.back());
    for (int axis = 0; axis < 3; ++axis)
    {
      object_bounds_[axis].push_back(box.min()[axis] - inflate);
      object_bounds_[axis + 3].push_back(box.max()[axis] + inflate);
    }
  }

  for (std::size_t l = 0; l < model_.links().size(); ++l)
    for (const auto& g : model_.links()[l].collision_geometries)
      geometries_.push_back({ l, g.shape, g.offset.isometry() });

  if (options_.self_collision)
  {
    const std::vector<std::size_t> body = rigidBodies(model_);
    auto adjacent = [&](std::size_t la, std::size_t lb) {
      if (body[la] == body[lb])
        return true;
      for (const Joint& joint : model_.joints())
      {
        const std::size_t p = body[*model_.linkIndex(joint.parent_link)];
        const std::size_t c = body[*model_.linkIndex(joint.child_link)];
        if ((p == body[la] && c == body[lb]) || (p == body[lb] && c == body[la]))
          return true;
      }
      return false;
    };
    for (std::size_t i = 0; i < geometries_.size(); ++i)
      for (std::size_t k = i + 1; k < geometries_.size(); ++k)
        if (!adjacent(geometries_[i].link, geometries_[k].link))
          self_pairs_.emplace_back(i, k);
  }
}

void CollisionChecker::checkDimension(const Eigen::VectorXd& q) const
{
  if (static_cast<std::size_t>(q.size()) != dimension_)
    throw Error(ErrorCode::DimensionMismatch, "group '" + group_ + "' expects " + std::to_string(dimension_) +
                                                  " positions, got " + std::to_string(q.size()));
}

std::vector<Eigen::Isometry3d> CollisionChecker::geometryPoses(const Eigen::VectorXd& q) const
{
  const std::vector<Eigen::Isometry3d> links = linkTransforms(model_, group_, q);
  std::vector<Eigen::Isometry3d> poses;
  poses.reserve(geometries_.size());
  for (const auto& g : geometries_)
    poses.push_back(links[g.link] * g.offset);
  return poses;
}

bool CollisionChecker::isValid(const Eigen::VectorXd& q) const
{
  checkDimension(q);
  const std::vector<Eigen::Isometry3d> poses = geometryPoses(q);
  const simd::KernelTable& kernels = simd::activeKernels();
  const std::size_t count = objects_.size();
  std::vector<std::uint8_t> hits(count);
  const double* bounds[6];
  for (int i = 0; i < 6; ++i)
    bounds[i] = object_bounds_[static_cast<std::size_t>(i)].data();

  for (std::size_t g = 0; g < geometries_.size() && count > 0; ++g)
  {
    const Eigen::AlignedBox3d box = worldAabb(geometries_[g].shape, poses[g]);
    const double query[6] = { box.min().x(), box.min().y(), box.min().z(),
                              box.max().x(), box.max().y(), box.max().z() };
    kernels.aabb_overlap(query, bounds, count, hits.data());
    for (std::size_t o = 0; o < count; ++o)
    {
      if (!hits[o])
        continue;
      if (shapeDistance(geometries_[g].shape, poses[g], objects_[o].shape, object_poses_[o]) - options_.padding < 0.0)
        return false;
    }
  }
  for (auto [i, k] : self_pairs_)
  {
    const Eigen::AlignedBox3d a = worldAabb(geometries_[i].shape, poses[i]);
    const Eigen::AlignedBox3d b = worldAabb(geometries_[k].shape, poses[k]);
    const Eigen::Vector3d pad = Eigen::Vector3d::Constant(options_.padding);
    if (!Eigen::AlignedBox3d(a.min() - pad, a.max() + pad).intersects(b))
      continue;
    if (shapeDistance(geometries_[i].shape, poses[i], geometries_[k].shape, poses[k]) - options_.padding < 0.0)
      return false;
  }
  return true;
}

CollisionReport CollisionChecker::report(const Eigen::VectorXd& q) const
{
  checkDimension(q);
  const std::vector<Eigen::Isometry3d> poses = geometryPoses(q);
  CollisionReport out;
  // (link, other) -> deepest penetration
  std::map<std::pair<std::string, std::string>, std::pair<bool, double>> deepest;

  for (std::size_t g = 0; g < geometries_.size(); ++g)
  {
    for (std::size_t o = 0; o < objects_.size(); ++o)
    {
      const double d =
          shapeDistance(geometries_[g].shape, poses[g], objects_[o].shape, object_poses_[o]) - options_.padding;
      out.min_clearance = std::min(out.min_clearance, d);
      if (d < 0.0)
      {
        auto& slot = deepest[{ model_.links()[geometries_[g].link].name, objects_[o].id }];
        slot = { false, std::max(slot.second, -d) };
      }
    }
  }
  for (auto [i, k] : self_pairs_)
  {
    const double d = shapeDistance(geometries_[i].shape, poses[i], geometries_[k].shape, poses[k]) - options_.padding;
    if (d < 0.0)
    {
      auto& slot = deepest[{ model_.links()[geometries_[i].link].name, model_.links()[geometries_[k].link].name }];
      slot = { true, std::max(slot.second, -d) };
    }
  }
  for (const auto& [key, value] : deepest)
    out.contacts.push_back({ key.first, key.second, value.first, value.second });
  out.in_collision = !out.contacts.empty();
  return out;
}

Eigen::VectorXd CollisionChecker::difference(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const
{
  Eigen::VectorXd d = b - a;
  for (std::size_t i = 0; i < wrap_.size(); ++i)
    if (wrap_[i])
      d[static_cast<Eigen::Index>(i)] = wrapAngle(d[static_cast<Eigen::Index>(i)]);
  return d;
}

Eigen::VectorXd CollisionChecker::interpolate(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double t) const
{
  if (t <= 0.0)
    return a;
  if (t >= 1.0)
    return b;
  Eigen::VectorXd q = a + t * difference(a, b);
  for (std::size_t i = 0; i < wrap_.size(); ++i)
    if (wrap_[i])
      q[static_cast<Eigen::Index>(i)] = wrapAngle(q[static_cast<Eigen::Index>(i)]);
  return q;
}

bool CollisionChecker::segmentValid(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double step) const
{
  checkDimension(a);
  checkDimension(b);
  if (!(step > 0.0))
    throw Error(ErrorCode::InvalidArgument, "segment step must be positive");
  if (!isValid(a) || !isValid(b))
    return false;
  const double span = difference(a, b).cwiseAbs().maxCoeff();
  if (span <= step)
    return true;
  // Dyadic subdivision: the samples for a finer step are a superset of the
  // samples for a coarser one.
  std::uint64_t segments = 1;
  while (span / static_cast<double>(segments) > step)
    segments *= 2;
  // Breadth-first over levels so that gross collisions are found early.
  for (std::uint64_t stride = segments / 2; stride >= 1; stride /= 2)
  {
    for (std::uint64_t i = stride; i < segments; i += 2 * stride)
    {
      const double t = static_cast<double>(i) / static_cast<double>(segments);
      if (!isValid(interpolate(a, b, t)))
        return false;
    }
    if (stride == 1)
      break;
  }
  return true;
}

CollisionReport robotInCollision(const RobotModel& model, const JointState& q, std::span<const CollisionObject> objects,
                                 const CollisionOptions& options)
{
  CollisionChecker checker(model, q.group, std::vector<CollisionObject>(objects.begin(), objects.end()), options);
  return checker.report(q.positions);
}

bool segmentValid(const RobotModel& model, const JointState& a, const JointState& b,
                  std::span<const CollisionObject> objects, double step, const CollisionOptions& options)
{
  CollisionChecker checker(model, a.group, std::vector<CollisionObject>(objects.begin(), objects.end()), options);
  return checker.segmentValid(a.positions, b.positions, step);
}

}  // namespace erupt
