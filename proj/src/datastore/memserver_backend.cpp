#include "stagebench/common/error.hpp"
#include "stagebench/datastore/crc32.hpp"
#include "stagebench/datastore/datastore.hpp"
#include "stagebench/server/socket.hpp"
#include "stagebench/server/wire.hpp"

#include <algorithm>
#include <array>

namespace stagebench::datastore {

namespace {

class SocketSource final : public wire::ByteSource {
public:
  explicit SocketSource(int fd) : fd_(fd) {}
  bool read_exact(std::uint8_t *dst, std::size_t n) override {
    return net::recv_exact(fd_, dst, n);
  }

private:
  int fd_;
};

struct Connection {
  net::Endpoint endpoint;
  net::Socket socket;
};

// Client side of the memserver protocol. Keys are routed to endpoint
// shard_of(key, #endpoints); with one endpoint this is a standalone server,
// with several it is a client-sharded cluster.
class MemserverBackend final : public Backend {
public:
  explicit MemserverBackend(const ServerInfo &info) {
    for (const auto &ep : info.endpoints) {
      conns_.push_back(Connection{net::parse_endpoint(ep), {}});
    }
  }

  std::int64_t put(const std::string &key, ByteView value) override {
    const auto resp = call(route(key), wire::Opcode::put, key, value);
    expect_ok(resp, "PUT");
    return 0;
  }

  std::optional<Bytes> get(const std::string &key) override {
    auto resp = call(route(key), wire::Opcode::get, key, {});
    if (resp.status == wire::Status::not_found) {
      return std::nullopt;
    }
    expect_ok(resp, "GET");
    return std::move(resp.payload);
  }

  bool exists(const std::string &key) override {
    const auto resp = call(route(key), wire::Opcode::exists, key, {});
    if (resp.status == wire::Status::not_found) {
      return false;
    }
    expect_ok(resp, "EXISTS");
    return true;
  }

  std::vector<std::string> list(std::string_view prefix) override {
    std::vector<std::string> keys;
    for (auto &conn : conns_) {
      const auto resp = call(conn, wire::Opcode::list, prefix, {});
      expect_ok(resp, "LIST");
      const std::string_view body = as_chars(resp.payload);
      std::size_t start = 0;
      while (start < body.size()) {
        auto end = body.find('\n', start);
        if (end == std::string_view::npos) {
          end = body.size();
        }
        if (end > start) {
          keys.emplace_back(body.substr(start, end - start));
        }
        start = end + 1;
      }
    }
    std::sort(keys.begin(), keys.end());
    return keys;
  }

  bool remove(const std::string &key) override {
    const auto resp = call(route(key), wire::Opcode::del, key, {});
    expect_ok(resp, "DEL");
    return as_chars(resp.payload) == "1";
  }

private:
  Connection &route(const std::string &key) { return conns_[shard_of(key, conns_.size())]; }

  wire::Response call(Connection &conn, wire::Opcode op, std::string_view key, ByteView value) {
    if (!conn.socket.valid()) {
      conn.socket = net::connect_tcp(conn.endpoint);
    }
    const Bytes header = wire::encode_request_header(op, key, value.size());
    const std::array<ByteView, 2> bufs{ByteView(header), value};
    if (!net::send_all(conn.socket.fd(), bufs)) {
      conn.socket.reset();
      throw Error(Errc::transport, "send to " + conn.endpoint.to_string() + " failed");
    }
    SocketSource src(conn.socket.fd());
    auto resp = wire::read_response(src);
    if (!resp) {
      conn.socket.reset();
      throw Error(Errc::transport, "connection to " + conn.endpoint.to_string() + " lost");
    }
    return std::move(*resp);
  }

  static void expect_ok(const wire::Response &resp, const char *what) {
    if (resp.status != wire::Status::ok) {
      throw Error(Errc::transport, std::string(what) + " failed: " +
                                       std::string(as_chars(resp.payload)));
    }
  }

  std::vector<Connection> conns_;
};

} // namespace

std::unique_ptr<Backend> make_memserver_backend(const ServerInfo &info) {
  return std::make_unique<MemserverBackend>(info);
}

} // namespace stagebench::datastore
