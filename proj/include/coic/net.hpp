#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>

#include "coic/wire.hpp"

namespace coic::net {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  // "host:port". Throws InvalidParameter.
  static Endpoint parse(std::string_view text);
  std::string str() const { return host + ":" + std::to_string(port); }
};

// Owning TCP socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  bool valid() const noexcept { return fd_ >= 0; }
  int fd() const noexcept { return fd_; }

  // Throws TransportError.
  void send_all(std::span<const std::uint8_t> bytes);
  // 0 on orderly close. Throws TransportError.
  std::size_t read_some(std::span<std::uint8_t> buffer);
  // Unblocks pending reads/accepts from another thread.
  void shutdown() noexcept;

 private:
  int fd_ = -1;
};

Socket connect_to(const Endpoint& endpoint);

class Listener {
 public:
  explicit Listener(const Endpoint& endpoint);

  std::uint16_t port() const noexcept { return port_; }
  // nullopt once shut down.
  std::optional<Socket> accept();
  void shutdown() noexcept;

 private:
  Socket socket_;
  std::uint16_t port_ = 0;
  std::atomic<bool> closed_{false};
};

// A socket plus its frame decoder.
class FramedConnection {
 public:
  explicit FramedConnection(Socket socket) : socket_(std::move(socket)) {}

  void send(const wire::Message& message);
  // nullopt on a clean close between frames. Throws TransportError on a
  // protocol error or a close mid-frame.
  std::optional<wire::Message> receive();
  Socket& socket() noexcept { return socket_; }

 private:
  Socket socket_;
  wire::FrameDecoder decoder_;
};

// Accept loop with one thread per connection.
class TcpServer {
 public:
  using Handler = std::function<void(FramedConnection&)>;

  TcpServer(const Endpoint& listen, Handler handler);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const noexcept { return listener_.port(); }
  void stop();

 private:
  struct Session {
    std::shared_ptr<FramedConnection> connection;
    std::thread worker;
  };

  void accept_loop();

  Listener listener_;
  Handler handler_;
  std::mutex mu_;
  std::list<Session> sessions_;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
};

}  // namespace coic::net
