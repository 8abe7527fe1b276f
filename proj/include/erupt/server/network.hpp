#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>

#include "erupt/server/server_core.hpp"

namespace erupt::server
{
struct NetworkConfig
{
  std::string bind_address = "0.0.0.0";
  /// 0 picks a free port.
  std::uint16_t tcp_port = protocol::kDefaultTcpPort;
  std::uint16_t ws_port = protocol::kDefaultWsPort;
  /// Served over HTTP on the WebSocket port; empty disables static files.
  std::string static_dir;
  std::size_t outbox_capacity = kDefaultOutboxCapacity;
};

/// Framed TCP listener plus the WebSocket ("/ws") and static HTTP listener,
/// on one I/O thread.
class NetworkServer
{
public:
  NetworkServer(ServerCore& core, NetworkConfig config);
  ~NetworkServer();
  NetworkServer(const NetworkServer&) = delete;
  NetworkServer& operator=(const NetworkServer&) = delete;

  /// Binds both listeners and starts the I/O thread. Throws Error(Io).
  void start();
  /// Sends every session an error frame, closes them and stops. Idempotent.
  void stop(const std::string& reason = "server shutting down");

  std::uint16_t tcpPort() const;
  std::uint16_t wsPort() const;
  std::size_t openConnections() const;

  struct Impl;

private:
  std::unique_ptr<Impl> impl_;
};

/// Content type for a static file extension.
std::string mimeType(const std::string& path);

}  // namespace erupt::server
