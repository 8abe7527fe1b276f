#include "erupt/server/peer.hpp"

#include "erupt/messages.hpp"

namespace erupt::server
{
bool Peer::deliver(const protocol::Message& message)
{
  {
    std::lock_guard lock(mutex_);
    if (closing_)
      return false;
    if (queue_.size() >= capacity_)
    {
      overflowed_ = true;
      closing_ = true;
      queue_.push_back(protocol::makeError(ErrorCode::Busy, "outbound queue overflow; closing session"));
    }
    else
    {
      queue_.push_back(message);
    }
  }
  wake();
  return !overflowed();
}

void Peer::closeAfter(std::optional<protocol::Message> last)
{
  {
    std::lock_guard lock(mutex_);
    if (closing_)
      return;
    closing_ = true;
    if (last)
      queue_.push_back(std::move(*last));
  }
  wake();
}

bool Peer::closing() const
{
  std::lock_guard lock(mutex_);
  return closing_;
}

bool Peer::overflowed() const
{
  std::lock_guard lock(mutex_);
  return overflowed_;
}

std::size_t Peer::queued() const
{
  std::lock_guard lock(mutex_);
  return queue_.size();
}

std::optional<protocol::Message> Peer::pop()
{
  std::lock_guard lock(mutex_);
  if (queue_.empty())
    return std::nullopt;
  protocol::Message m = std::move(queue_.front());
  queue_.pop_front();
  return m;
}

bool Peer::drainedForClose() const
{
  std::lock_guard lock(mutex_);
  return closing_ && queue_.empty();
}

}  // namespace erupt::server
