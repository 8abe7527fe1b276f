#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "erupt/protocol.hpp"

namespace erupt::protocol
{
/// Blocking framed-TCP client with a background reader. Incoming messages
/// queue up until taken with next() or waitFor().
class Client
{
public:
  using Millis = std::chrono::milliseconds;

  /// Throws Error(Io) when the connection fails.
  Client(const std::string& host, std::uint16_t port);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  void send(const Message& message);
  /// Raw bytes, for exercising the server's decoder.
  void sendBytes(const std::string& bytes);

  std::optional<Message> next(Millis timeout);
  /// First queued or incoming message satisfying `match`; the others stay queued.
  std::optional<Message> waitFor(const std::function<bool(const Message&)>& match, Millis timeout);
  /// Sends `message` (which must carry an id) and waits for the reply with
  /// that id. Throws Error(Io) on timeout or disconnect.
  Message request(const Message& message, Millis timeout = Millis(10000));
  /// hello + snapshot_request; returns the server hello.
  Message handshake(const std::string& client_name, Millis timeout = Millis(5000));

  std::int64_t nextId()
  {
    return next_id_++;
  }
  /// True once the server closed the connection (queued messages remain readable).
  bool closed() const;
  /// Waits until the server closes the connection.
  bool waitClosed(Millis timeout);
  void close();

private:
  void readLoop();

  struct Socket;
  std::unique_ptr<Socket> socket_;
  std::thread reader_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Message> inbox_;
  bool closed_ = false;
  std::mutex write_mutex_;
  std::int64_t next_id_ = 1;
};

}  // namespace erupt::protocol
