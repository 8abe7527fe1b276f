#include "erupt/server/executor.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <sstream>

#include "erupt/error.hpp"
#include "erupt/json_codec.hpp"

namespace erupt::server
{
namespace
{
using Clock = std::chrono::steady_clock;

/// Sleeps until `when` or until stop is requested. False on stop.
bool sleepUntil(std::stop_token stop, Clock::time_point when)
{
  std::mutex m;
  std::condition_variable_any cv;
  std::unique_lock lock(m);
  return !cv.wait_until(lock, stop, when, [] { return false; }) && !stop.stop_requested();
}

Clock::duration seconds(double s)
{
  return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(s));
}
}  // namespace

MockExecutor::MockExecutor(std::vector<std::uint8_t> wrap, double playback_rate, double publish_hz)
  : wrap_(std::move(wrap)), rate_(playback_rate), hz_(publish_hz)
{
  if (!(rate_ > 0.0) || !(hz_ > 0.0))
    throw Error(ErrorCode::InvalidArgument, "playback rate and publish rate must be positive");
}

MockExecutor::~MockExecutor()
{
  stop();
}

std::vector<double> MockExecutor::publishTimes(const Trajectory& trajectory, double playback_rate, double publish_hz)
{
  const double duration = trajectory.duration();
  // One wall-clock tick covers `playback_rate / publish_hz` trajectory seconds.
  const double step = playback_rate / publish_hz;
  std::vector<double> times;
  for (std::size_t k = 0;; ++k)
  {
    const double t = static_cast<double>(k) * step;
    if (t >= duration)
      break;
    times.push_back(t);
  }
  for (const auto& p : trajectory.points)
    times.push_back(p.time_from_start);
  times.push_back(duration);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

void MockExecutor::start(const Trajectory& trajectory, StateCallback on_state, FinishCallback on_finish)
{
  if (trajectory.points.empty())
    throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  std::lock_guard lock(mutex_);
  if (busy_.exchange(true))
    throw Error(ErrorCode::Busy, "executor is already running a trajectory");
  if (worker_.joinable())
    worker_.join();
  worker_ = std::jthread([this, trajectory, on_state = std::move(on_state),
                          on_finish = std::move(on_finish)](std::stop_token stop) {
    const double duration = trajectory.duration();
    const auto times = publishTimes(trajectory, rate_, hz_);
    const auto t0 = Clock::now();
    double progress = 0.0;
    bool completed = true;
    for (double t : times)
    {
      if (!sleepUntil(stop, t0 + seconds(t / rate_)))
      {
        completed = false;
        break;
      }
      const TrajectorySample s = sampleTrajectory(trajectory, t, wrap_);
      progress = duration > 0.0 ? t / duration : 1.0;
      on_state(JointState(trajectory.group, s.positions), progress);
    }
    busy_ = false;
    on_finish(completed, progress);
  });
}

void MockExecutor::stop()
{
  std::lock_guard lock(mutex_);
  if (worker_.joinable())
  {
    worker_.request_stop();
    worker_.join();
  }
}

bool MockExecutor::busy() const
{
  return busy_;
}

FileReplaySource::FileReplaySource(const std::string& path, double playback_rate) : rate_(playback_rate)
{
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open recording '" + path + "'");
  std::stringstream text;
  text << in.rdbuf();
  json::Json j;
  try
  {
    j = json::Json::parse(text.str());
  }
  catch (const json::Json::exception& e)
  {
    throw Error(ErrorCode::MalformedJson, "recording '" + path + "' is not valid JSON: " + e.what());
  }
  recording_ = json::decodeTrajectory(j);
  if (!(rate_ > 0.0))
    throw Error(ErrorCode::InvalidArgument, "playback rate must be positive");
}

FileReplaySource::FileReplaySource(Trajectory recording, double playback_rate)
  : recording_(std::move(recording)), rate_(playback_rate)
{
  if (!(rate_ > 0.0))
    throw Error(ErrorCode::InvalidArgument, "playback rate must be positive");
}

FileReplaySource::~FileReplaySource()
{
  stop();
}

void FileReplaySource::start(Callback on_state)
{
  std::lock_guard lock(mutex_);
  if (worker_.joinable())
  {
    worker_.request_stop();
    worker_.join();
  }
  worker_ = std::jthread([this, on_state = std::move(on_state)](std::stop_token stop) {
    const auto t0 = Clock::now();
    for (const auto& p : recording_.points)
    {
      if (!sleepUntil(stop, t0 + seconds(p.time_from_start / rate_)))
        return;
      on_state(JointState(recording_.group, p.positions));
    }
  });
}

void FileReplaySource::stop()
{
  std::lock_guard lock(mutex_);
  if (worker_.joinable())
  {
    worker_.request_stop();
    worker_.join();
  }
}

}  // namespace erupt::server
