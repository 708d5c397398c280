#include "stagebench/server/server_manager.hpp"

#include "stagebench/common/error.hpp"

#include <json.hpp>

#include <array>
#include <fstream>
#include <sstream>

namespace stagebench::server {

using datastore::BackendKind;
using nlohmann::json;

ServerConfig server_config_from_json(std::string_view text) {
  ServerConfig cfg;
  try {
    const json j = json::parse(text);
    const auto kind = datastore::parse_backend_kind(j.at("kind").get<std::string>());
    if (!kind) {
      throw Error(Errc::invalid_argument, "unknown backend kind in server config");
    }
    cfg.kind = *kind;
    cfg.bind = j.value("bind", std::vector<std::string>{});
    cfg.roots = j.value("roots", std::vector<std::string>{});
    cfg.shard_count = j.value("shard_count", std::size_t{1});
    cfg.info_path = j.value("info_path", std::string{});
  } catch (const json::exception &e) {
    throw Error(Errc::invalid_argument, std::string("bad server config: ") + e.what());
  }
  return cfg;
}

ServerConfig load_server_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::invalid_argument, "cannot open server config " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return server_config_from_json(ss.str());
}

ServerManager::ServerManager(ServerConfig config) : config_(std::move(config)) {}

ServerManager::~ServerManager() {
  try {
    stop_server();
  } catch (...) {
  }
}

const datastore::ServerInfo &ServerManager::start_server() {
  if (info_) {
    return *info_;
  }
  if (config_.shard_count < 1) {
    throw Error(Errc::startup, "shard_count must be >= 1");
  }
  datastore::ServerInfo info;
  info.kind = config_.kind;

  if (config_.kind == BackendKind::memserver) {
    if (config_.bind.empty() || !config_.roots.empty()) {
      throw Error(Errc::startup, "memserver requires bind addresses and no roots");
    }
    std::vector<std::unique_ptr<MemServer>> servers;
    for (const auto &addr : config_.bind) {
      auto srv = std::make_unique<MemServer>(net::parse_endpoint(addr));
      srv->start(); // a failure unwinds and stops the ones already up
      info.endpoints.push_back(srv->endpoint().to_string());
      servers.push_back(std::move(srv));
    }
    info.shard_count = info.endpoints.size();
    servers_ = std::move(servers);
  } else {
    if (config_.roots.empty() || !config_.bind.empty()) {
      throw Error(Errc::startup, "directory backend requires roots and no bind addresses");
    }
    for (const auto &root : config_.roots) {
      for (std::size_t i = 0; i < config_.shard_count; ++i) {
        const auto dir = std::filesystem::path(root) / ("shard_" + std::to_string(i));
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec || !std::filesystem::is_directory(dir)) {
          throw Error(Errc::startup, "cannot create " + dir.string() + ": " + ec.message());
        }
      }
      info.roots.push_back(std::filesystem::absolute(root).lexically_normal().string());
    }
    info.shard_count = config_.shard_count;
  }

  datastore::validate(info);
  if (!config_.info_path.empty()) {
    try {
      datastore::save_server_info(info, config_.info_path);
    } catch (const std::exception &e) {
      for (auto &s : servers_) {
        s->stop();
      }
      servers_.clear();
      throw Error(Errc::startup, e.what());
    }
  }
  info_ = std::move(info);
  return *info_;
}

void ServerManager::stop_server() {
  for (auto &s : servers_) {
    s->stop();
  }
  servers_.clear();
}

void ServerManager::wait_for_shutdown() {
  for (auto &s : servers_) {
    s->wait_for_shutdown();
  }
}

const datastore::ServerInfo &ServerManager::get_server_info() const {
  if (!info_) {
    throw Error(Errc::not_initialized, "server not started");
  }
  return *info_;
}

namespace {

std::optional<wire::Response> round_trip(const std::string &endpoint, wire::Opcode op) {
  class Source final : public wire::ByteSource {
  public:
    explicit Source(int fd) : fd_(fd) {}
    bool read_exact(std::uint8_t *dst, std::size_t n) override {
      return net::recv_exact(fd_, dst, n);
    }

  private:
    int fd_;
  };
  try {
    auto sock = net::connect_tcp(net::parse_endpoint(endpoint));
    const Bytes req = wire::encode_request_header(op, {}, 0);
    const std::array<ByteView, 1> bufs{ByteView(req)};
    if (!net::send_all(sock.fd(), bufs)) {
      return std::nullopt;
    }
    Source src(sock.fd());
    return wire::read_response(src);
  } catch (const Error &) {
    return std::nullopt;
  }
}

} // namespace

std::size_t send_shutdown(const datastore::ServerInfo &info) {
  std::size_t acked = 0;
  for (const auto &ep : info.endpoints) {
    const auto resp = round_trip(ep, wire::Opcode::shutdown);
    if (resp && resp->status == wire::Status::ok) {
      ++acked;
    }
  }
  return acked;
}

bool ping(const std::string &endpoint) {
  const auto resp = round_trip(endpoint, wire::Opcode::ping);
  return resp && resp->status == wire::Status::ok && resp->payload.empty();
}

} // namespace stagebench::server
