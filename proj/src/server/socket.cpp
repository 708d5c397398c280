#include "stagebench/server/socket.hpp"

#include "stagebench/common/error.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/uio.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <climits>
#include <charconv>
#include <cstring>
#include <vector>

namespace stagebench::net {

std::string Endpoint::to_string() const {
  return host + ":" + std::to_string(port);
}

Endpoint parse_endpoint(const std::string &text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw Error(Errc::invalid_argument, "endpoint must be host:port, got '" + text + "'");
  }
  unsigned port = 0;
  const char *first = text.data() + colon + 1;
  const char *last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, port);
  if (ec != std::errc{} || ptr != last || port > 65535) {
    throw Error(Errc::invalid_argument, "bad port in endpoint '" + text + "'");
  }
  return Endpoint{text.substr(0, colon), static_cast<std::uint16_t>(port)};
}

void Socket::reset(int fd) noexcept {
  if (fd_ >= 0) {
    ::close(fd_);
  }
  fd_ = fd;
}

namespace {

sockaddr_in resolve(const Endpoint &ep, Errc code) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (ep.host.empty() || ep.host == "*") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    return addr;
  }
  if (inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) {
    return addr;
  }
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo *res = nullptr;
  if (getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw Error(code, "cannot resolve host '" + ep.host + "'");
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in *>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

} // namespace

Socket connect_tcp(const Endpoint &ep) {
  const sockaddr_in addr = resolve(ep, Errc::transport);
  Socket sock(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!sock.valid()) {
    throw_errno(Errc::transport, "socket");
  }
  if (::connect(sock.fd(), reinterpret_cast<const sockaddr *>(&addr), sizeof(addr)) != 0) {
    throw_errno(Errc::transport, "connect " + ep.to_string());
  }
  int one = 1;
  ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return sock;
}

std::pair<Socket, Endpoint> listen_tcp(const Endpoint &ep) {
  const sockaddr_in addr = resolve(ep, Errc::startup);
  Socket sock(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!sock.valid()) {
    throw_errno(Errc::startup, "socket");
  }
  int one = 1;
  ::setsockopt(sock.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(sock.fd(), reinterpret_cast<const sockaddr *>(&addr), sizeof(addr)) != 0) {
    throw_errno(Errc::startup, "bind " + ep.to_string());
  }
  if (::listen(sock.fd(), SOMAXCONN) != 0) {
    throw_errno(Errc::startup, "listen " + ep.to_string());
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(sock.fd(), reinterpret_cast<sockaddr *>(&bound), &len);
  Endpoint actual{ep.host.empty() ? std::string("0.0.0.0") : ep.host, ntohs(bound.sin_port)};
  return {std::move(sock), actual};
}

bool send_all(int fd, std::span<const std::span<const std::uint8_t>> buffers) {
  std::vector<iovec> iov;
  iov.reserve(buffers.size());
  for (const auto &b : buffers) {
    if (!b.empty()) {
      iov.push_back({const_cast<std::uint8_t *>(b.data()), b.size()});
    }
  }
  std::size_t idx = 0;
  while (idx < iov.size()) {
    msghdr msg{};
    msg.msg_iov = iov.data() + idx;
    msg.msg_iovlen = std::min<std::size_t>(iov.size() - idx, IOV_MAX);
    const ssize_t n = ::sendmsg(fd, &msg, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      return false;
    }
    auto remaining = static_cast<std::size_t>(n);
    while (idx < iov.size() && remaining >= iov[idx].iov_len) {
      remaining -= iov[idx].iov_len;
      ++idx;
    }
    if (idx < iov.size()) {
      iov[idx].iov_base = static_cast<std::uint8_t *>(iov[idx].iov_base) + remaining;
      iov[idx].iov_len -= remaining;
    }
  }
  return true;
}

bool recv_exact(int fd, std::uint8_t *dst, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, dst + got, n - got, 0);
    if (r == 0) {
      return false;
    }
    if (r < 0) {
      if (errno == EINTR) {
        continue;
      }
      return false;
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

} // namespace stagebench::net
