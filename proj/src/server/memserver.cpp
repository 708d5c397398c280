#include "stagebench/server/memserver.hpp"

#include "stagebench/common/error.hpp"
#include "stagebench/datastore/crc32.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <fcntl.h>

namespace stagebench::server {

KeyValueStore::Partition &KeyValueStore::partition_for(const std::string &key) {
  return parts_[datastore::crc32(key) % partitions];
}

const KeyValueStore::Partition &KeyValueStore::partition_for(const std::string &key) const {
  return parts_[datastore::crc32(key) % partitions];
}

void KeyValueStore::put(const std::string &key, Bytes value) {
  auto v = std::make_shared<const Bytes>(std::move(value));
  auto &p = partition_for(key);
  std::lock_guard lock(p.mu);
  p.map[key] = std::move(v);
}

KeyValueStore::Value KeyValueStore::get(const std::string &key) const {
  const auto &p = partition_for(key);
  std::lock_guard lock(p.mu);
  auto it = p.map.find(key);
  return it == p.map.end() ? nullptr : it->second;
}

bool KeyValueStore::exists(const std::string &key) const {
  const auto &p = partition_for(key);
  std::lock_guard lock(p.mu);
  return p.map.contains(key);
}

bool KeyValueStore::erase(const std::string &key) {
  auto &p = partition_for(key);
  std::lock_guard lock(p.mu);
  return p.map.erase(key) > 0;
}

std::vector<std::string> KeyValueStore::keys_with_prefix(std::string_view prefix) const {
  std::vector<std::string> out;
  for (const auto &p : parts_) {
    std::lock_guard lock(p.mu);
    for (const auto &[k, v] : p.map) {
      if (k.starts_with(prefix)) {
        out.push_back(k);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void KeyValueStore::clear() {
  for (auto &p : parts_) {
    std::lock_guard lock(p.mu);
    p.map.clear();
  }
}

std::size_t KeyValueStore::size() const {
  std::size_t n = 0;
  for (const auto &p : parts_) {
    std::lock_guard lock(p.mu);
    n += p.map.size();
  }
  return n;
}

namespace {

wire::Response ok(std::string_view payload = {}) {
  const auto b = as_bytes(payload);
  return {wire::Status::ok, Bytes(b.begin(), b.end())};
}

wire::Response not_found() { return {wire::Status::not_found, {}}; }

wire::Response err(std::string_view message) {
  const auto b = as_bytes(message);
  return {wire::Status::err, Bytes(b.begin(), b.end())};
}

class SocketSource final : public wire::ByteSource {
public:
  explicit SocketSource(int fd) : fd_(fd) {}
  bool read_exact(std::uint8_t *dst, std::size_t n) override {
    return net::recv_exact(fd_, dst, n);
  }

private:
  int fd_;
};

} // namespace

wire::Response handle_request(wire::Request &req, KeyValueStore &store) {
  switch (req.op) {
  case wire::Opcode::put:
    store.put(req.key, std::move(req.value));
    return ok();
  case wire::Opcode::get: {
    auto v = store.get(req.key);
    if (!v) {
      return not_found();
    }
    return {wire::Status::ok, *v};
  }
  case wire::Opcode::exists:
    return store.exists(req.key) ? ok() : not_found();
  case wire::Opcode::del:
    return ok(store.erase(req.key) ? "1" : "0");
  case wire::Opcode::list: {
    std::string joined;
    for (const auto &k : store.keys_with_prefix(req.key)) {
      if (!joined.empty()) {
        joined.push_back('\n');
      }
      joined += k;
    }
    return ok(joined);
  }
  case wire::Opcode::ping:
  case wire::Opcode::shutdown:
    return ok();
  }
  return err("unknown opcode");
}

MemServer::MemServer(net::Endpoint bind) : requested_(std::move(bind)) {}

MemServer::~MemServer() { stop(); }

void MemServer::start() {
  if (running_) {
    return;
  }
  auto [sock, bound] = net::listen_tcp(requested_);
  if (::pipe2(wake_pipe_, O_CLOEXEC) != 0) {
    throw_errno(Errc::startup, "pipe");
  }
  listener_ = std::move(sock);
  bound_ = bound;
  {
    std::lock_guard lock(shutdown_mu_);
    shutdown_requested_ = false;
  }
  running_ = true;
  acceptor_ = std::thread(&MemServer::accept_loop, this);
}

void MemServer::stop() {
  if (!running_.exchange(false)) {
    return;
  }
  const char b = 'x';
  [[maybe_unused]] auto w = ::write(wake_pipe_[1], &b, 1);
  if (acceptor_.joinable()) {
    acceptor_.join();
  }
  listener_.reset();
  ::close(wake_pipe_[0]);
  ::close(wake_pipe_[1]);
  wake_pipe_[0] = wake_pipe_[1] = -1;

  std::list<Handler> handlers;
  {
    std::lock_guard lock(handlers_mu_);
    for (auto &h : handlers_) {
      ::shutdown(h.fd, SHUT_RDWR);
    }
    handlers.splice(handlers.end(), handlers_);
  }
  for (auto &h : handlers) {
    if (h.thread.joinable()) {
      h.thread.join();
    }
  }
  store_.clear();
  request_shutdown();
}

void MemServer::wait_for_shutdown() {
  std::unique_lock lock(shutdown_mu_);
  shutdown_cv_.wait(lock, [this] { return shutdown_requested_; });
}

void MemServer::request_shutdown() {
  {
    std::lock_guard lock(shutdown_mu_);
    shutdown_requested_ = true;
  }
  shutdown_cv_.notify_all();
}

void MemServer::reap_finished() {
  std::list<Handler> finished;
  {
    std::lock_guard lock(handlers_mu_);
    for (auto it = handlers_.begin(); it != handlers_.end();) {
      auto next = std::next(it);
      if (it->done) {
        finished.splice(finished.end(), handlers_, it);
      }
      it = next;
    }
  }
  for (auto &h : finished) {
    h.thread.join();
  }
}

void MemServer::accept_loop() {
  pollfd fds[2] = {{listener_.fd(), POLLIN, 0}, {wake_pipe_[0], POLLIN, 0}};
  while (running_) {
    const int rc = ::poll(fds, 2, 1000);
    reap_finished();
    if (rc < 0) {
      if (errno == EINTR) {
        continue;
      }
      break;
    }
    if (fds[1].revents != 0) {
      break;
    }
    if ((fds[0].revents & POLLIN) == 0) {
      continue;
    }
    const int fd = ::accept4(listener_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      continue;
    }
    std::lock_guard lock(handlers_mu_);
    if (!running_) {
      ::close(fd);
      break;
    }
    auto &h = handlers_.emplace_back();
    h.fd = fd;
    h.thread = std::thread(&MemServer::serve, this, &h);
  }
}

void MemServer::serve(Handler *h) {
  const int fd = h->fd;
  SocketSource src(fd);
  while (true) {
    wire::Frame frame = wire::read_request(src);
    if (std::holds_alternative<wire::EndOfStream>(frame)) {
      break;
    }
    if (auto *bad = std::get_if<wire::Malformed>(&frame)) {
      const Bytes out = wire::encode_response(err(bad->reason));
      const std::array<ByteView, 1> bufs{ByteView(out)};
      net::send_all(fd, bufs);
      break;
    }
    if (auto *rej = std::get_if<wire::Rejected>(&frame)) {
      const Bytes out = wire::encode_response(err(rej->reason));
      const std::array<ByteView, 1> bufs{ByteView(out)};
      if (!net::send_all(fd, bufs)) {
        break;
      }
      continue;
    }
    auto &req = std::get<wire::Request>(frame);
    const bool shutdown = req.op == wire::Opcode::shutdown;
    // GET replies straight from the shared immutable value.
    bool sent = false;
    if (req.op == wire::Opcode::get) {
      if (auto v = store_.get(req.key)) {
        const Bytes header = wire::encode_response_header(wire::Status::ok, v->size());
        const std::array<ByteView, 2> bufs{ByteView(header), ByteView(*v)};
        sent = net::send_all(fd, bufs);
      } else {
        const Bytes out = wire::encode_response(not_found());
        const std::array<ByteView, 1> bufs{ByteView(out)};
        sent = net::send_all(fd, bufs);
      }
    } else {
      const Bytes out = wire::encode_response(handle_request(req, store_));
      const std::array<ByteView, 1> bufs{ByteView(out)};
      sent = net::send_all(fd, bufs);
    }
    if (shutdown) {
      // Stop accepting right away; the owner observes the request and
      // performs the full stop().
      request_shutdown();
      break;
    }
    if (!sent) {
      break;
    }
  }
  {
    std::lock_guard lock(handlers_mu_);
    ::close(fd);
    h->fd = -1;
  }
  h->done = true;
}

} // namespace stagebench::server
