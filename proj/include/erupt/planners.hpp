#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <stop_token>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "erupt/collision/robot_collision.hpp"

namespace erupt
{
using Path = std::vector<Eigen::VectorXd>;

/// Joint-space nearest-neighbour index over a growing set of states. Scans
/// with the active SIMD distance kernel; ties resolve to the lowest index.
class NearestNeighbors
{
public:
  NearestNeighbors(std::size_t dim, std::vector<std::uint8_t> wrap);

  std::size_t size() const
  {
    return count_;
  }
  void add(const Eigen::VectorXd& q);
  std::size_t nearest(const Eigen::VectorXd& q) const;
  /// Up to k indices sorted by distance (then index), excluding `skip`.
  std::vector<std::size_t> kNearest(const Eigen::VectorXd& q, std::size_t k,
                                    std::size_t skip = static_cast<std::size_t>(-1)) const;

private:
  void distances(const Eigen::VectorXd& q) const;

  std::size_t dim_;
  std::vector<std::uint8_t> wrap_;
  std::size_t capacity_ = 0;
  std::size_t count_ = 0;
  std::vector<double> soa_;
  mutable std::vector<double> scratch_;
};

/// Shared limits for one planning call: wall-clock deadline and cancellation.
struct PlannerBudget
{
  std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
  std::stop_token stop;

  bool expired() const
  {
    return std::chrono::steady_clock::now() >= deadline;
  }
  bool cancelled() const
  {
    return stop.stop_requested();
  }
};

/// Validity oracle plus sampling over one group's joint space.
class StateSpace
{
public:
  StateSpace(const CollisionChecker& checker, double edge_step);

  std::size_t dimension() const
  {
    return checker_.dimension();
  }
  const std::vector<std::uint8_t>& wrap() const
  {
    return checker_.wrapMask();
  }
  double edgeStep() const
  {
    return edge_step_;
  }
  bool valid(const Eigen::VectorXd& q) const
  {
    return checker_.isValid(q);
  }
  bool edgeValid(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const
  {
    return checker_.segmentValid(a, b, edge_step_);
  }
  double distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const
  {
    return checker_.difference(a, b).norm();
  }
  Eigen::VectorXd interpolate(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double t) const
  {
    return checker_.interpolate(a, b, t);
  }
  Eigen::VectorXd sample(std::mt19937_64& rng) const;

private:
  const CollisionChecker& checker_;
  double edge_step_;
  Eigen::VectorXd lower_, upper_;
};

enum class PlannerOutcome
{
  Success,
  Exhausted,
  TimedOut,
  Cancelled,
};

struct PlannerResult
{
  PlannerOutcome outcome = PlannerOutcome::Exhausted;
  Path path;
  std::size_t iterations = 0;
};

struct RrtConnectParams
{
  double step = 0.3;
  std::size_t max_iterations = 5000;
};

PlannerResult rrtConnect(const StateSpace& space, const Eigen::VectorXd& start, const Eigen::VectorXd& goal,
                         const RrtConnectParams& params, std::mt19937_64& rng, const PlannerBudget& budget = {});

struct PrmParams
{
  std::size_t num_samples = 500;
  std::size_t k_neighbors = 10;
};

struct Roadmap
{
  std::vector<Eigen::VectorXd> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // i < j, in insertion order
};

/// Samples `num_samples` valid states and links each to its k nearest
/// neighbours over valid edges. Returns nullopt when the budget runs out.
std::optional<Roadmap> buildRoadmap(const StateSpace& space, const PrmParams& params, std::mt19937_64& rng,
                                    const PlannerBudget& budget = {});

/// Builds a roadmap, links start and goal into it and runs Dijkstra.
PlannerResult prm(const StateSpace& space, const Eigen::VectorXd& start, const Eigen::VectorXd& goal,
                  const PrmParams& params, std::mt19937_64& rng, const PlannerBudget& budget = {},
                  Roadmap* roadmap_out = nullptr);

/// Joint-space length with shortest arcs on continuous joints.
double pathLength(const StateSpace& space, const Path& path);

/// Random shortcutting: tries to replace the stretch between two random
/// points on the path with a straight valid edge when that is shorter.
/// Endpoints never move; returns the input unchanged when nothing helps.
Path shortcutPath(const StateSpace& space, const Path& path, std::size_t iterations, std::mt19937_64& rng,
                  const PlannerBudget& budget = {});

}  // namespace erupt
