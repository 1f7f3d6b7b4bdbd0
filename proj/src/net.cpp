#include "coic/net.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <vector>

#include "coic/error.hpp"

namespace coic::net {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

addrinfo* resolve(const Endpoint& endpoint, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(endpoint.port);
  const char* host = endpoint.host.empty() ? nullptr : endpoint.host.c_str();
  if (int rc = ::getaddrinfo(host, port.c_str(), &hints, &res); rc != 0) {
    throw TransportError("resolve " + endpoint.str() + ": " + ::gai_strerror(rc));
  }
  return res;
}

}  // namespace

Endpoint Endpoint::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw InvalidParameter("expected host:port, got " + std::string(text));
  Endpoint e;
  e.host = std::string(text.substr(0, colon));
  const auto port = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), e.port);
  if (ec != std::errc{} || ptr != port.data() + port.size()) {
    throw InvalidParameter("bad port in " + std::string(text));
  }
  if (e.host.empty()) e.host = "0.0.0.0";
  return e;
}

Socket::~Socket() {
  if (fd_ >= 0) ::close(fd_);
}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

void Socket::send_all(std::span<const std::uint8_t> bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("send"));
    }
    bytes = bytes.subspan(static_cast<std::size_t>(n));
  }
}

std::size_t Socket::read_some(std::span<std::uint8_t> buffer) {
  while (true) {
    const ssize_t n = ::recv(fd_, buffer.data(), buffer.size(), 0);
    if (n >= 0) return static_cast<std::size_t>(n);
    if (errno == EINTR) continue;
    if (errno == ECONNRESET) return 0;
    throw TransportError(errno_text("recv"));
  }
}

void Socket::shutdown() noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

Socket connect_to(const Endpoint& endpoint) {
  addrinfo* res = resolve(endpoint, false);
  Socket sock;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket candidate(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!candidate.valid()) continue;
    if (::connect(candidate.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      sock = std::move(candidate);
      break;
    }
  }
  ::freeaddrinfo(res);
  if (!sock.valid()) throw TransportError(errno_text(("connect " + endpoint.str()).c_str()));
  int one = 1;
  ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return sock;
}

Listener::Listener(const Endpoint& endpoint) {
  addrinfo* res = resolve(endpoint, true);
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket candidate(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!candidate.valid()) continue;
    int one = 1;
    ::setsockopt(candidate.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(candidate.fd(), ai->ai_addr, ai->ai_addrlen) == 0 &&
        ::listen(candidate.fd(), 64) == 0) {
      socket_ = std::move(candidate);
      break;
    }
  }
  ::freeaddrinfo(res);
  if (!socket_.valid()) throw TransportError(errno_text(("listen " + endpoint.str()).c_str()));

  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

std::optional<Socket> Listener::accept() {
  while (!closed_) {
    const int fd = ::accept(socket_.fd(), nullptr, nullptr);
    if (fd >= 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return Socket(fd);
    }
    if (errno == EINTR || errno == ECONNABORTED) continue;
    break;
  }
  return std::nullopt;
}

void Listener::shutdown() noexcept {
  closed_ = true;
  socket_.shutdown();
}

void FramedConnection::send(const wire::Message& message) { socket_.send_all(wire::encode(message)); }

std::optional<wire::Message> FramedConnection::receive() {
  std::vector<std::uint8_t> chunk(64 * 1024);
  bool closed = false;
  while (true) {
    wire::DecodeResult r = decoder_.next(closed);
    if (auto* d = std::get_if<wire::Decoded>(&r)) return std::move(d->message);
    if (auto* e = std::get_if<wire::ProtocolError>(&r)) {
      throw TransportError("protocol error " + std::string(wire::to_string(e->code)) + ": " +
                           e->detail);
    }
    if (closed) return std::nullopt;
    const std::size_t n = socket_.read_some(chunk);
    if (n == 0) {
      closed = true;
      continue;
    }
    decoder_.feed(std::span(chunk.data(), n));
  }
}

TcpServer::TcpServer(const Endpoint& listen, Handler handler)
    : listener_(listen), handler_(std::move(handler)) {
  acceptor_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::accept_loop() {
  while (auto sock = listener_.accept()) {
    auto conn = std::make_shared<FramedConnection>(std::move(*sock));
    std::lock_guard lock(mu_);
    if (stopping_) break;
    // TODO: reap sessions whose worker has finished; long-lived servers keep them until stop().
    sessions_.push_back(Session{conn, std::thread([this, conn] {
                                  try {
                                    handler_(*conn);
                                  } catch (const std::exception&) {
                                    // Connection-scoped failure; drop the connection.
                                  }
                                  conn->socket().shutdown();
                                })});
  }
}

void TcpServer::stop() {
  if (stopping_.exchange(true)) return;
  listener_.shutdown();
  if (acceptor_.joinable()) acceptor_.join();
  std::list<Session> sessions;
  {
    std::lock_guard lock(mu_);
    sessions.swap(sessions_);
  }
  for (Session& s : sessions) s.connection->socket().shutdown();
  for (Session& s : sessions) {
    if (s.worker.joinable()) s.worker.join();
  }
}

}  // namespace coic::net
