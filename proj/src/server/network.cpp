#include "erupt/server/network.hpp"

#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "erupt/messages.hpp"

namespace erupt::server
{
namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

std::string mimeType(const std::string& path)
{
  const std::string ext = std::filesystem::path(path).extension().string();
  if (ext == ".html" || ext == ".htm")
    return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs")
    return "text/javascript; charset=utf-8";
  if (ext == ".css")
    return "text/css; charset=utf-8";
  if (ext == ".json" || ext == ".map")
    return "application/json";
  if (ext == ".svg")
    return "image/svg+xml";
  if (ext == ".png")
    return "image/png";
  if (ext == ".jpg" || ext == ".jpeg")
    return "image/jpeg";
  if (ext == ".wasm")
    return "application/wasm";
  if (ext == ".urdf" || ext == ".xml")
    return "application/xml";
  if (ext == ".stl" || ext == ".glb" || ext == ".bin")
    return "application/octet-stream";
  return "text/plain; charset=utf-8";
}

struct NetworkServer::Impl
{
  Impl(ServerCore& c, NetworkConfig cfg) : core(c), config(std::move(cfg)), tcp_acceptor(io), ws_acceptor(io)
  {
  }

  ServerCore& core;
  NetworkConfig config;
  asio::io_context io;
  tcp::acceptor tcp_acceptor;
  tcp::acceptor ws_acceptor;
  std::thread thread;
  std::atomic<std::size_t> connections{ 0 };
  bool started = false;
  bool stopped = false;

  void acceptTcp();
  void acceptWs();
};

namespace
{
/// Framed TCP session.
class TcpConnection : public Peer, public std::enable_shared_from_this<TcpConnection>
{
public:
  TcpConnection(tcp::socket socket, NetworkServer::Impl& server)
    : Peer(server.config.outbox_capacity), socket_(std::move(socket)), server_(server)
  {
    ++server_.connections;
  }
  ~TcpConnection() override
  {
    --server_.connections;
  }

  void start()
  {
    session_ = server_.core.connect(shared_from_this());
    read();
    flush();
  }

protected:
  void wake() override
  {
    asio::post(socket_.get_executor(), [self = shared_from_this()] { self->flush(); });
  }

private:
  void read()
  {
    socket_.async_read_some(asio::buffer(buffer_), [self = shared_from_this()](beast::error_code ec, std::size_t n) {
      if (ec)
        return self->finish();
      self->decoder_.feed(std::string_view(self->buffer_.data(), n));
      while (auto item = self->decoder_.next())
        self->server_.core.handle(self->session_, *item);
      if (!self->decoder_.failed())
        self->read();
    });
  }

  void flush()
  {
    if (writing_ || finished_)
      return;
    auto next = pop();
    if (!next)
    {
      if (drainedForClose())
      {
        beast::error_code ignored;
        socket_.shutdown(tcp::socket::shutdown_both, ignored);
        socket_.close(ignored);
        finish();
      }
      return;
    }
    try
    {
      frame_ = protocol::encodeFrame(*next);
    }
    catch (const Error& e)
    {
      frame_ = protocol::encodeFrame(protocol::makeError(e.code(), e.what(), next->id));
    }
    writing_ = true;
    asio::async_write(socket_, asio::buffer(frame_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec)
      {
        beast::error_code ignored;
        self->socket_.close(ignored);
        return self->finish();
      }
      self->flush();
    });
  }

  void finish()
  {
    if (finished_)
      return;
    finished_ = true;
    server_.core.disconnect(session_);
  }

  tcp::socket socket_;
  NetworkServer::Impl& server_;
  SessionId session_ = 0;
  protocol::FrameDecoder decoder_;
  std::array<char, 64 * 1024> buffer_{};
  std::string frame_;
  bool writing_ = false;
  bool finished_ = false;
};

/// One JSON message per WebSocket text frame.
class WsConnection : public Peer, public std::enable_shared_from_this<WsConnection>
{
public:
  WsConnection(tcp::socket socket, NetworkServer::Impl& server)
    : Peer(server.config.outbox_capacity), ws_(std::move(socket)), server_(server)
  {
    ++server_.connections;
  }
  ~WsConnection() override
  {
    --server_.connections;
  }

  void start(http::request<http::string_body> request)
  {
    ws_.read_message_max(protocol::kMaxPayload);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(request, [self = shared_from_this()](beast::error_code ec) {
      if (ec)
        return;
      self->accepted_ = true;
      self->session_ = self->server_.core.connect(self->shared_from_this());
      self->read();
      self->flush();
    });
  }

protected:
  void wake() override
  {
    asio::post(ws_.get_executor(), [self = shared_from_this()] { self->flush(); });
  }

private:
  void read()
  {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec)
      {
        if (ec == websocket::error::message_too_big)
          self->server_.core.handle(self->session_,
                                    protocol::DecodeError{ ErrorCode::FrameTooLong, "message exceeds 16 MiB",
                                                           std::nullopt, true });
        return self->finish();
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      const protocol::Decoded item = protocol::decodePayload(text);
      self->server_.core.handle(self->session_, item);
      const auto* err = std::get_if<protocol::DecodeError>(&item);
      if (!(err && err->fatal))
        self->read();
    });
  }

  void flush()
  {
    if (!accepted_ || writing_ || finished_)
      return;
    auto next = pop();
    if (!next)
    {
      if (drainedForClose() && !closing_sent_)
      {
        closing_sent_ = true;
        ws_.async_close(websocket::close_code::normal,
                        [self = shared_from_this()](beast::error_code) { self->finish(); });
      }
      return;
    }
    text_ = protocol::serialize(*next);
    if (text_.size() > protocol::kMaxPayload)
      text_ = protocol::serialize(protocol::makeError(ErrorCode::OversizeMessage, "response too large", next->id));
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(text_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec)
        return self->finish();
      self->flush();
    });
  }

  void finish()
  {
    if (finished_)
      return;
    finished_ = true;
    if (accepted_)
      server_.core.disconnect(session_);
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().close(ignored);
  }

  websocket::stream<beast::tcp_stream> ws_;
  NetworkServer::Impl& server_;
  SessionId session_ = 0;
  beast::flat_buffer buffer_;
  std::string text_;
  bool accepted_ = false;
  bool writing_ = false;
  bool finished_ = false;
  bool closing_sent_ = false;
};

/// Plain HTTP on the WebSocket port: upgrades on "/ws", static files otherwise.
class HttpConnection : public std::enable_shared_from_this<HttpConnection>
{
public:
  HttpConnection(tcp::socket socket, NetworkServer::Impl& server) : stream_(std::move(socket)), server_(server)
  {
  }

  void start()
  {
    read();
  }

private:
  void read()
  {
    request_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, request_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec)
        return self->close();
      self->route();
    });
  }

  void route()
  {
    if (websocket::is_upgrade(request_))
    {
      if (targetPath() == "/ws")
      {
        stream_.expires_never();
        std::make_shared<WsConnection>(stream_.release_socket(), server_)->start(std::move(request_));
        return;
      }
      return respond(http::status::not_found, "text/plain", "no WebSocket endpoint here; use /ws\n");
    }
    if (request_.method() != http::verb::get && request_.method() != http::verb::head)
      return respond(http::status::method_not_allowed, "text/plain", "method not allowed\n");
    serveStatic();
  }

  std::string targetPath() const
  {
    std::string target(request_.target());
    if (auto q = target.find_first_of("?#"); q != std::string::npos)
      target.resize(q);
    return target;
  }

  void serveStatic()
  {
    if (server_.config.static_dir.empty())
      return respond(http::status::not_found, "text/plain", "static files are not enabled\n");
    std::string path = targetPath();
    if (path.empty() || path.front() != '/' || path.find("..") != std::string::npos ||
        path.find('\\') != std::string::npos || path.find('\0') != std::string::npos)
      return respond(http::status::bad_request, "text/plain", "bad path\n");
    if (path.back() == '/')
      path += "index.html";
    const std::filesystem::path full = std::filesystem::path(server_.config.static_dir) / path.substr(1);
    std::error_code fs_ec;
    if (!std::filesystem::is_regular_file(full, fs_ec))
      return respond(http::status::not_found, "text/plain", "not found\n");
    std::ifstream in(full, std::ios::binary);
    std::stringstream body;
    body << in.rdbuf();
    respond(http::status::ok, mimeType(full.string()), body.str());
  }

  void respond(http::status status, const std::string& content_type, std::string body)
  {
    auto response = std::make_shared<http::response<http::string_body>>(status, request_.version());
    response->set(http::field::server, "erupt");
    response->set(http::field::content_type, content_type);
    response->keep_alive(request_.keep_alive());
    const bool head = request_.method() == http::verb::head;
    response->content_length(body.size());
    if (!head)
      response->body() = std::move(body);
    http::async_write(stream_, *response, [self = shared_from_this(), response](beast::error_code ec, std::size_t) {
      if (ec || !response->keep_alive())
        return self->close();
      self->read();
    });
  }

  void close()
  {
    beast::error_code ignored;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
  }

  beast::tcp_stream stream_;
  NetworkServer::Impl& server_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
};

void listen(tcp::acceptor& acceptor, const std::string& address, std::uint16_t port, const char* what)
{
  try
  {
    const tcp::endpoint endpoint(asio::ip::make_address(address), port);
    acceptor.open(endpoint.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(endpoint);
    acceptor.listen();
  }
  catch (const boost::system::system_error& e)
  {
    throw Error(ErrorCode::Io, std::string("cannot listen for ") + what + " on " + address + ":" +
                                   std::to_string(port) + ": " + e.what());
  }
}
}  // namespace

void NetworkServer::Impl::acceptTcp()
{
  tcp_acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec)
      return;
    socket.set_option(tcp::no_delay(true));
    std::make_shared<TcpConnection>(std::move(socket), *this)->start();
    acceptTcp();
  });
}

void NetworkServer::Impl::acceptWs()
{
  ws_acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec)
      return;
    socket.set_option(tcp::no_delay(true));
    std::make_shared<HttpConnection>(std::move(socket), *this)->start();
    acceptWs();
  });
}

NetworkServer::NetworkServer(ServerCore& core, NetworkConfig config)
  : impl_(std::make_unique<Impl>(core, std::move(config)))
{
}

NetworkServer::~NetworkServer()
{
  stop();
}

void NetworkServer::start()
{
  if (impl_->started)
    return;
  listen(impl_->tcp_acceptor, impl_->config.bind_address, impl_->config.tcp_port, "TCP");
  listen(impl_->ws_acceptor, impl_->config.bind_address, impl_->config.ws_port, "WebSocket/HTTP");
  impl_->acceptTcp();
  impl_->acceptWs();
  impl_->started = true;
  impl_->thread = std::thread([this] { impl_->io.run(); });
}

void NetworkServer::stop(const std::string& reason)
{
  if (!impl_->started || impl_->stopped)
    return;
  impl_->stopped = true;
  asio::post(impl_->io, [this] {
    beast::error_code ignored;
    impl_->tcp_acceptor.close(ignored);
    impl_->ws_acceptor.close(ignored);
  });
  impl_->core.shutdown(reason);
  // Let the error frames drain before tearing the loop down.
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
  while (impl_->connections > 0 && std::chrono::steady_clock::now() < deadline)
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  impl_->io.stop();
  if (impl_->thread.joinable())
    impl_->thread.join();
}

std::uint16_t NetworkServer::tcpPort() const
{
  return impl_->tcp_acceptor.local_endpoint().port();
}

std::uint16_t NetworkServer::wsPort() const
{
  return impl_->ws_acceptor.local_endpoint().port();
}

std::size_t NetworkServer::openConnections() const
{
  return impl_->connections;
}

}  // namespace erupt::server
