#pragma once

#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>

#include "erupt/protocol.hpp"

namespace erupt::server
{
inline constexpr std::size_t kDefaultOutboxCapacity = 1000;

/// One connected client as seen by the server core: a bounded outbound
/// queue drained by the transport one message at a time.
class Peer
{
public:
  explicit Peer(std::size_t capacity = kDefaultOutboxCapacity) : capacity_(capacity)
  {
  }
  virtual ~Peer() = default;
  Peer(const Peer&) = delete;
  Peer& operator=(const Peer&) = delete;

  /// Thread-safe. Returns false when the message was not queued: the peer is
  /// closing, or the queue just overflowed, in which case an error frame is
  /// queued and the peer closes after writing it.
  bool deliver(const protocol::Message& message);
  /// Queues `last` (if any) and closes once the queue has drained.
  void closeAfter(std::optional<protocol::Message> last = std::nullopt);

  bool closing() const;
  bool overflowed() const;
  std::size_t queued() const;

protected:
  /// Transport hook: something was queued or a close was requested. Called
  /// without the queue lock held, from any thread.
  virtual void wake() = 0;

  std::optional<protocol::Message> pop();
  /// True once a close was requested and the queue is empty.
  bool drainedForClose() const;

private:
  const std::size_t capacity_;
  mutable std::mutex mutex_;
  std::deque<protocol::Message> queue_;
  bool closing_ = false;
  bool overflowed_ = false;
};

}  // namespace erupt::server
