#pragma once

#include <chrono>
#include <thread>

#include "erupt/messages.hpp"
#include "erupt/server/server_core.hpp"
#include "support/scenes.hpp"

namespace erupt::test
{
/// In-memory peer: messages are read back with take().
class RecordingPeer : public server::Peer
{
public:
  explicit RecordingPeer(std::size_t capacity = server::kDefaultOutboxCapacity) : Peer(capacity)
  {
  }

  std::vector<protocol::Message> take()
  {
    std::vector<protocol::Message> out;
    while (auto m = pop())
      out.push_back(std::move(*m));
    return out;
  }

  /// Polls until `match` appears or the timeout expires; everything read
  /// on the way lands in `seen`.
  std::optional<protocol::Message> waitFor(const std::function<bool(const protocol::Message&)>& match,
                                           std::chrono::milliseconds timeout = std::chrono::milliseconds(10000))
  {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true)
    {
      for (auto& m : take())
      {
        seen.push_back(m);
        pending_.push_back(std::move(m));
      }
      for (auto it = pending_.begin(); it != pending_.end(); ++it)
      {
        if (match(*it))
        {
          protocol::Message m = std::move(*it);
          pending_.erase(it);
          return m;
        }
      }
      if (std::chrono::steady_clock::now() >= deadline)
        return std::nullopt;
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
  }

  /// Everything read by waitFor, matched or not.
  std::vector<protocol::Message> seen;

private:
  std::deque<protocol::Message> pending_;

protected:
  void wake() override
  {
  }
};

inline server::ServerConfig serverConfig(const std::string& urdf, const std::string& scene = "")
{
  server::ServerConfig config;
  config.model = loadModel(urdf);
  if (!scene.empty())
    config.scene = json::loadSceneFile(dataPath("scenes/" + scene));
  config.seed = 1234;
  return config;
}

/// Connects a recording peer and completes the hello.
inline std::pair<server::SessionId, std::shared_ptr<RecordingPeer>> greet(server::ServerCore& core,
                                                                          const std::string& name)
{
  auto peer = std::make_shared<RecordingPeer>();
  const server::SessionId id = core.connect(peer);
  core.handle(id, protocol::makeHello(name));
  peer->take();
  return { id, peer };
}

inline Trajectory straightTrajectory(const std::string& group, Eigen::VectorXd from, Eigen::VectorXd to,
                                     double duration)
{
  Trajectory t;
  t.group = group;
  const Eigen::VectorXd v = (to - from) / duration;
  t.points.push_back({ 0.0, from, v });
  t.points.push_back({ duration / 2, (from + to) / 2, v });
  t.points.push_back({ duration, to, v });
  return t;
}

}  // namespace erupt::test
