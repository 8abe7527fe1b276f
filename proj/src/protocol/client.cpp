#include "erupt/client.hpp"

#include <boost/asio.hpp>

#include "erupt/messages.hpp"

namespace erupt::protocol
{
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

struct Client::Socket
{
  asio::io_context io;
  tcp::socket socket{ io };
};

Client::Client(const std::string& host, std::uint16_t port) : socket_(std::make_unique<Socket>())
{
  try
  {
    tcp::resolver resolver(socket_->io);
    asio::connect(socket_->socket, resolver.resolve(host, std::to_string(port)));
    socket_->socket.set_option(tcp::no_delay(true));
  }
  catch (const boost::system::system_error& e)
  {
    throw Error(ErrorCode::Io, "cannot connect to " + host + ":" + std::to_string(port) + ": " + e.what());
  }
  reader_ = std::thread([this] { readLoop(); });
}

Client::~Client()
{
  close();
}

void Client::close()
{
  boost::system::error_code ignored;
  socket_->socket.shutdown(tcp::socket::shutdown_both, ignored);
  if (reader_.joinable())
    reader_.join();
  socket_->socket.close(ignored);
}

void Client::readLoop()
{
  FrameDecoder decoder;
  std::array<char, 64 * 1024> buffer{};
  while (true)
  {
    boost::system::error_code ec;
    const std::size_t n = socket_->socket.read_some(asio::buffer(buffer), ec);
    if (ec)
      break;
    decoder.feed(std::string_view(buffer.data(), n));
    bool got = false;
    while (auto item = decoder.next())
    {
      if (const auto* m = std::get_if<Message>(&*item))
      {
        std::lock_guard lock(mutex_);
        inbox_.push_back(*m);
        got = true;
      }
    }
    if (got)
      cv_.notify_all();
    if (decoder.failed())
      break;
  }
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

void Client::send(const Message& message)
{
  sendBytes(encodeFrame(message));
}

void Client::sendBytes(const std::string& bytes)
{
  std::lock_guard lock(write_mutex_);
  boost::system::error_code ec;
  asio::write(socket_->socket, asio::buffer(bytes), ec);
  if (ec)
    throw Error(ErrorCode::Io, "send failed: " + ec.message());
}

std::optional<Message> Client::next(Millis timeout)
{
  return waitFor([](const Message&) { return true; }, timeout);
}

std::optional<Message> Client::waitFor(const std::function<bool(const Message&)>& match, Millis timeout)
{
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::unique_lock lock(mutex_);
  std::size_t scanned = 0;
  while (true)
  {
    for (; scanned < inbox_.size(); ++scanned)
    {
      if (match(inbox_[scanned]))
      {
        Message m = std::move(inbox_[scanned]);
        inbox_.erase(inbox_.begin() + static_cast<std::ptrdiff_t>(scanned));
        return m;
      }
    }
    if (closed_)
      return std::nullopt;
    if (cv_.wait_until(lock, deadline) == std::cv_status::timeout && scanned == inbox_.size())
      return std::nullopt;
  }
}

Message Client::request(const Message& message, Millis timeout)
{
  if (!message.id)
    throw Error(ErrorCode::InvalidArgument, "request needs an id");
  send(message);
  const std::int64_t id = *message.id;
  auto reply = waitFor([id](const Message& m) { return m.id == id; }, timeout);
  if (!reply)
    throw Error(ErrorCode::Io, "no reply to '" + message.type + "' id " + std::to_string(id));
  return *reply;
}

Message Client::handshake(const std::string& client_name, Millis timeout)
{
  send(makeHello(client_name));
  auto hello = waitFor([](const Message& m) { return m.type == type::kHello || m.type == type::kError; }, timeout);
  if (!hello)
    throw Error(ErrorCode::Io, "no hello from server");
  if (hello->type == type::kError)
    throw Error(ErrorCode::ProtocolVersion, hello->body.value("human_text", std::string("hello rejected")));
  send(makeSnapshotRequest(nextId()));
  return *hello;
}

bool Client::closed() const
{
  std::lock_guard lock(mutex_);
  return closed_;
}

bool Client::waitClosed(Millis timeout)
{
  std::unique_lock lock(mutex_);
  return cv_.wait_for(lock, timeout, [this] { return closed_; });
}

}  // namespace erupt::protocol
