#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>

namespace stagebench::net {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  std::string to_string() const;
  friend bool operator==(const Endpoint &, const Endpoint &) = default;
};

// Parses "host:port". Throws Error(invalid_argument) on malformed input.
Endpoint parse_endpoint(const std::string &text);

class Socket {
public:
  Socket() = default;
  explicit Socket(int fd) noexcept : fd_(fd) {}
  ~Socket() { reset(); }

  Socket(Socket &&other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket &operator=(Socket &&other) noexcept {
    if (this != &other) {
      reset(std::exchange(other.fd_, -1));
    }
    return *this;
  }
  Socket(const Socket &) = delete;
  Socket &operator=(const Socket &) = delete;

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  void reset(int fd = -1) noexcept;

private:
  int fd_ = -1;
};

// Connects with TCP_NODELAY. Throws Error(transport).
Socket connect_tcp(const Endpoint &ep);

// Binds and listens. Port 0 picks an ephemeral port; the bound endpoint is
// returned alongside the socket. Throws Error(startup).
std::pair<Socket, Endpoint> listen_tcp(const Endpoint &ep);

// Writes every byte of every buffer. Returns false on a broken connection.
bool send_all(int fd, std::span<const std::span<const std::uint8_t>> buffers);

// Reads exactly n bytes. Returns false on EOF or error.
bool recv_exact(int fd, std::uint8_t *dst, std::size_t n);

} // namespace stagebench::net
