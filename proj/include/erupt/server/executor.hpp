#pragma once

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "erupt/joint_state.hpp"
#include "erupt/trajectory.hpp"

namespace erupt::server
{
/// Adapter seam for the physical robot controller.
class TrajectoryExecutor
{
public:
  /// Commanded state and fraction of the trajectory completed.
  using StateCallback = std::function<void(const JointState&, double progress)>;
  /// Called exactly once per started trajectory, from the executor thread.
  using FinishCallback = std::function<void(bool completed, double progress)>;

  virtual ~TrajectoryExecutor() = default;
  /// Throws Error(Busy) while a trajectory is running.
  virtual void start(const Trajectory& trajectory, StateCallback on_state, FinishCallback on_finish) = 0;
  /// Aborts the running trajectory and waits for its finish callback. Must
  /// not be called from inside a callback.
  virtual void stop() = 0;
  virtual bool busy() const = 0;
};

/// Replays trajectories in real time, publishing interpolated states on a
/// fixed-rate grid plus every knot time.
class MockExecutor : public TrajectoryExecutor
{
public:
  MockExecutor(std::vector<std::uint8_t> wrap = {}, double playback_rate = 1.0, double publish_hz = 50.0);
  ~MockExecutor() override;

  void start(const Trajectory& trajectory, StateCallback on_state, FinishCallback on_finish) override;
  void stop() override;
  bool busy() const override;

  /// Trajectory times at which a state is published, in order.
  static std::vector<double> publishTimes(const Trajectory& trajectory, double playback_rate, double publish_hz);

private:
  std::vector<std::uint8_t> wrap_;
  double rate_;
  double hz_;
  mutable std::mutex mutex_;
  std::jthread worker_;
  std::atomic<bool> busy_{ false };
};

/// External joint-state source driving the scene while mirroring.
class JointStateSource
{
public:
  using Callback = std::function<void(const JointState&)>;
  virtual ~JointStateSource() = default;
  virtual void start(Callback on_state) = 0;
  /// Stops publishing and waits for the worker. Not callable from a callback.
  virtual void stop() = 0;
};

/// Plays the knot positions of a recorded trajectory file at their
/// recorded times, once.
class FileReplaySource : public JointStateSource
{
public:
  /// Throws Error(Io / MalformedJson / InvalidMessage).
  explicit FileReplaySource(const std::string& path, double playback_rate = 1.0);
  explicit FileReplaySource(Trajectory recording, double playback_rate = 1.0);
  ~FileReplaySource() override;

  void start(Callback on_state) override;
  void stop() override;
  const Trajectory& recording() const
  {
    return recording_;
  }

private:
  Trajectory recording_;
  double rate_;
  std::mutex mutex_;
  std::jthread worker_;
};

}  // namespace erupt::server
