#include "erupt/planners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <set>

#include "erupt/error.hpp"
#include "erupt/simd/kernels.hpp"

namespace erupt
{
NearestNeighbors::NearestNeighbors(std::size_t dim, std::vector<std::uint8_t> wrap) : dim_(dim), wrap_(std::move(wrap))
{
  if (wrap_.size() != dim_)
    wrap_.assign(dim_, 0);
}

void NearestNeighbors::add(const Eigen::VectorXd& q)
{
  if (count_ == capacity_)
  {
    const std::size_t grown = std::max<std::size_t>(64, capacity_ * 2);
    std::vector<double> soa(dim_ * grown, 0.0);
    for (std::size_t d = 0; d < dim_; ++d)
      std::copy_n(soa_.begin() + static_cast<std::ptrdiff_t>(d * capacity_), count_,
                  soa.begin() + static_cast<std::ptrdiff_t>(d * grown));
    soa_.swap(soa);
    capacity_ = grown;
  }
  for (std::size_t d = 0; d < dim_; ++d)
    soa_[d * capacity_ + count_] = q[static_cast<Eigen::Index>(d)];
  ++count_;
}

void NearestNeighbors::distances(const Eigen::VectorXd& q) const
{
  scratch_.resize(count_);
  simd::activeKernels().squared_distances(q.data(), soa_.data(), capacity_, count_, dim_, wrap_.data(),
                                          scratch_.data());
}

std::size_t NearestNeighbors::nearest(const Eigen::VectorXd& q) const
{
  if (count_ == 0)
    throw Error(ErrorCode::InvalidArgument, "nearest neighbour query on an empty set");
  distances(q);
  return static_cast<std::size_t>(std::min_element(scratch_.begin(), scratch_.end()) - scratch_.begin());
}

std::vector<std::size_t> NearestNeighbors::kNearest(const Eigen::VectorXd& q, std::size_t k, std::size_t skip) const
{
  if (count_ == 0)
    return {};
  distances(q);
  std::vector<std::size_t> idx;
  idx.reserve(count_);
  for (std::size_t i = 0; i < count_; ++i)
    if (i != skip)
      idx.push_back(i);
  const auto closer = [&](std::size_t a, std::size_t b) {
    return scratch_[a] < scratch_[b] || (scratch_[a] == scratch_[b] && a < b);
  };
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), closer);
  idx.resize(k);
  return idx;
}

StateSpace::StateSpace(const CollisionChecker& checker, double edge_step) : checker_(checker), edge_step_(edge_step)
{
  if (!(edge_step > 0.0))
    throw Error(ErrorCode::InvalidArgument, "edge step must be positive");
  const RobotModel& model = checker.model();
  const Group& g = model.group(checker.group());
  const auto n = static_cast<Eigen::Index>(g.actuated.size());
  lower_.resize(n);
  upper_.resize(n);
  for (Eigen::Index k = 0; k < n; ++k)
  {
    const Joint& joint = model.joints()[g.actuated[static_cast<std::size_t>(k)]];
    lower_[k] = joint.limits.lower.value_or(-std::numbers::pi);
    upper_[k] = joint.limits.upper.value_or(std::numbers::pi);
  }
}

Eigen::VectorXd StateSpace::sample(std::mt19937_64& rng) const
{
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd q(lower_.size());
  for (Eigen::Index k = 0; k < q.size(); ++k)
    q[k] = lower_[k] + unit(rng) * (upper_[k] - lower_[k]);
  return q;
}

double pathLength(const StateSpace& space, const Path& path)
{
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i)
    total += space.distance(path[i - 1], path[i]);
  return total;
}

namespace
{
struct Tree
{
  std::vector<Eigen::VectorXd> nodes;
  std::vector<std::size_t> parent;
  NearestNeighbors index;

  Tree(const StateSpace& space, const Eigen::VectorXd& root) : index(space.dimension(), space.wrap())
  {
    add(root, static_cast<std::size_t>(-1));
  }
  std::size_t add(const Eigen::VectorXd& q, std::size_t p)
  {
    nodes.push_back(q);
    parent.push_back(p);
    index.add(q);
    return nodes.size() - 1;
  }
  Path branch(std::size_t leaf) const
  {
    Path out;
    for (std::size_t i = leaf; i != static_cast<std::size_t>(-1); i = parent[i])
      out.push_back(nodes[i]);
    return out;  // leaf to root
  }
};

enum class Extend
{
  Trapped,
  Advanced,
  Reached,
};

Extend extend(const StateSpace& space, Tree& tree, const Eigen::VectorXd& target, double step, std::size_t& added)
{
  const std::size_t near = tree.index.nearest(target);
  const Eigen::VectorXd& from = tree.nodes[near];
  const double d = space.distance(from, target);
  const bool reaches = d <= step;
  Eigen::VectorXd q = reaches ? target : space.interpolate(from, target, step / d);
  if (!space.edgeValid(from, q))
    return Extend::Trapped;
  added = tree.add(q, near);
  return reaches ? Extend::Reached : Extend::Advanced;
}
}  // namespace

PlannerResult rrtConnect(const StateSpace& space, const Eigen::VectorXd& start, const Eigen::VectorXd& goal,
                         const RrtConnectParams& params, std::mt19937_64& rng, const PlannerBudget& budget)
{
  PlannerResult result;
  if (space.distance(start, goal) == 0.0)
  {
    result.outcome = PlannerOutcome::Success;
    result.path = { start };
    return result;
  }
  if (space.edgeValid(start, goal))
  {
    result.outcome = PlannerOutcome::Success;
    result.path = { start, goal };
    return result;
  }

  Tree a(space, start), b(space, goal);
  bool a_is_start = true;
  for (result.iterations = 1; result.iterations <= params.max_iterations; ++result.iterations)
  {
    if (budget.cancelled())
    {
      result.outcome = PlannerOutcome::Cancelled;
      return result;
    }
    if (budget.expired())
    {
      result.outcome = PlannerOutcome::TimedOut;
      return result;
    }
    const Eigen::VectorXd target = space.sample(rng);
    std::size_t new_a = 0;
    if (extend(space, a, target, params.step, new_a) != Extend::Trapped)
    {
      const Eigen::VectorXd& q = a.nodes[new_a];
      std::size_t new_b = 0;
      Extend status = Extend::Advanced;
      while (status == Extend::Advanced)
        status = extend(space, b, q, params.step, new_b);
      if (status == Extend::Reached)
      {
        Path from_a = a.branch(new_a);  // q back to a's root
        Path from_b = b.branch(new_b);  // q back to b's root
        std::reverse(from_a.begin(), from_a.end());
        // from_b starts with the copy of q that closed the gap.
        from_a.insert(from_a.end(), from_b.begin() + 1, from_b.end());
        if (!a_is_start)
          std::reverse(from_a.begin(), from_a.end());
        from_a.front() = start;
        from_a.back() = goal;
        result.outcome = PlannerOutcome::Success;
        result.path = std::move(from_a);
        return result;
      }
    }
    std::swap(a, b);
    a_is_start = !a_is_start;
  }
  result.iterations = params.max_iterations;
  result.outcome = PlannerOutcome::Exhausted;
  return result;
}

namespace
{
// Links node `i` to its k nearest neighbours, skipping pairs already tried.
// Returns false when the budget ran out.
bool connectNode(const StateSpace& space, Roadmap& map, const NearestNeighbors& index, std::size_t i, std::size_t k,
                 std::set<std::pair<std::size_t, std::size_t>>& tried, const PlannerBudget& budget)
{
  for (std::size_t j : index.kNearest(map.nodes[i], k, i))
  {
    const auto key = std::minmax(i, j);
    if (!tried.insert(key).second)
      continue;
    if (budget.cancelled() || budget.expired())
      return false;
    if (space.edgeValid(map.nodes[key.first], map.nodes[key.second]))
      map.edges.emplace_back(key.first, key.second);
  }
  return true;
}

bool sampleNodes(const StateSpace& space, Roadmap& map, NearestNeighbors& index, std::size_t count,
                 std::mt19937_64& rng, const PlannerBudget& budget)
{
  const std::size_t max_draws = std::max<std::size_t>(1000, 100 * count);
  std::size_t draws = 0;
  std::size_t accepted = 0;
  while (accepted < count && draws < max_draws)
  {
    if ((draws & 63) == 0 && (budget.cancelled() || budget.expired()))
      return false;
    ++draws;
    Eigen::VectorXd q = space.sample(rng);
    if (!space.valid(q))
      continue;
    map.nodes.push_back(q);
    index.add(q);
    ++accepted;
  }
  return true;
}
}  // namespace

std::optional<Roadmap> buildRoadmap(const StateSpace& space, const PrmParams& params, std::mt19937_64& rng,
                                    const PlannerBudget& budget)
{
  Roadmap map;
  NearestNeighbors index(space.dimension(), space.wrap());
  if (!sampleNodes(space, map, index, params.num_samples, rng, budget))
    return std::nullopt;
  std::set<std::pair<std::size_t, std::size_t>> tried;
  for (std::size_t i = 0; i < map.nodes.size(); ++i)
    if (!connectNode(space, map, index, i, params.k_neighbors, tried, budget))
      return std::nullopt;
  return map;
}

PlannerResult prm(const StateSpace& space, const Eigen::VectorXd& start, const Eigen::VectorXd& goal,
                  const PrmParams& params, std::mt19937_64& rng, const PlannerBudget& budget, Roadmap* roadmap_out)
{
  PlannerResult result;
  if (space.distance(start, goal) == 0.0)
  {
    result.outcome = PlannerOutcome::Success;
    result.path = { start };
    return result;
  }
  auto stopped = [&] {
    result.outcome = budget.cancelled() ? PlannerOutcome::Cancelled : PlannerOutcome::TimedOut;
    return result;
  };

  std::optional<Roadmap> built = buildRoadmap(space, params, rng, budget);
  if (!built)
    return stopped();
  Roadmap& map = *built;
  NearestNeighbors index(space.dimension(), space.wrap());
  for (const auto& q : map.nodes)
    index.add(q);
  std::set<std::pair<std::size_t, std::size_t>> tried;
  for (const auto& e : map.edges)
    tried.insert(e);

  const std::size_t s = map.nodes.size();
  map.nodes.push_back(start);
  index.add(start);
  const std::size_t g = map.nodes.size();
  map.nodes.push_back(goal);
  index.add(goal);
  if (!connectNode(space, map, index, s, params.k_neighbors, tried, budget) ||
      !connectNode(space, map, index, g, params.k_neighbors, tried, budget))
    return stopped();
  result.iterations = map.nodes.size();

  std::vector<std::vector<std::pair<std::size_t, double>>> adj(map.nodes.size());
  for (const auto& [i, j] : map.edges)
  {
    const double w = space.distance(map.nodes[i], map.nodes[j]);
    adj[i].emplace_back(j, w);
    adj[j].emplace_back(i, w);
  }
  std::vector<double> dist(map.nodes.size(), std::numeric_limits<double>::infinity());
  std::vector<std::size_t> prev(map.nodes.size(), static_cast<std::size_t>(-1));
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[s] = 0.0;
  open.emplace(0.0, s);
  while (!open.empty())
  {
    auto [d, u] = open.top();
    open.pop();
    if (d > dist[u])
      continue;
    if (u == g)
      break;
    for (auto [v, w] : adj[u])
    {
      if (d + w < dist[v])
      {
        dist[v] = d + w;
        prev[v] = u;
        open.emplace(dist[v], v);
      }
    }
  }
  if (roadmap_out)
    *roadmap_out = map;
  if (!std::isfinite(dist[g]))
  {
    result.outcome = PlannerOutcome::Exhausted;
    return result;
  }
  for (std::size_t v = g; v != static_cast<std::size_t>(-1); v = prev[v])
    result.path.push_back(map.nodes[v]);
  std::reverse(result.path.begin(), result.path.end());
  result.outcome = PlannerOutcome::Success;
  return result;
}

Path shortcutPath(const StateSpace& space, const Path& path, std::size_t iterations, std::mt19937_64& rng,
                  const PlannerBudget& budget)
{
  if (path.size() < 3)
    return path;
  Path current = path;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t it = 0; it < iterations && current.size() >= 3; ++it)
  {
    if (budget.cancelled() || budget.expired())
      break;
    // Pick two points on the path, each somewhere on a segment, and try to
    // join them directly.
    std::uniform_int_distribution<std::size_t> seg(0, current.size() - 2);
    std::size_t i = seg(rng), j = seg(rng);
    double ti = unit(rng), tj = unit(rng);
    if (i > j || (i == j && ti > tj))
    {
      std::swap(i, j);
      std::swap(ti, tj);
    }
    if (j == i)
      continue;
    // Snap to waypoints when the draw lands on the endpoints of the path.
    const Eigen::VectorXd a = (i == 0 && ti < 0.1) ? current.front() : space.interpolate(current[i], current[i + 1], ti);
    const Eigen::VectorXd b =
        (j == current.size() - 2 && tj > 0.9) ? current.back() : space.interpolate(current[j], current[j + 1], tj);

    double old_len = space.distance(a, current[i + 1]) + space.distance(current[j], b);
    for (std::size_t k = i + 1; k < j; ++k)
      old_len += space.distance(current[k], current[k + 1]);
    const double new_len = space.distance(a, b);
    if (!(new_len < old_len - 1e-12))
      continue;
    if (!space.edgeValid(a, b))
      continue;

    Path next(current.begin(), current.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    if (space.distance(next.back(), a) > 0.0)
      next.push_back(a);
    if (space.distance(next.back(), b) > 0.0)
      next.push_back(b);
    for (std::size_t k = j + 1; k < current.size(); ++k)
      if (space.distance(next.back(), current[k]) > 0.0)
        next.push_back(current[k]);
    // Safety net: the splice points come from valid segments but re-check the
    // two new joins explicitly.
    bool ok = true;
    for (std::size_t k = 1; k < next.size() && ok; ++k)
      if (!space.edgeValid(next[k - 1], next[k]))
        ok = false;
    if (ok && pathLength(space, next) <= pathLength(space, current))
      current = std::move(next);
  }
  current.front() = path.front();
  current.back() = path.back();
  return current;
}

}  // namespace erupt
