#pragma once

#include "stagebench/datastore/server_info.hpp"
#include "stagebench/server/memserver.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace stagebench::server {

struct ServerConfig {
  datastore::BackendKind kind = datastore::BackendKind::filesystem;
  std::vector<std::string> bind;  // host:port per memserver endpoint
  std::vector<std::string> roots; // directory backends
  std::size_t shard_count = 1;
  std::filesystem::path info_path; // empty: don't publish a file
};

ServerConfig server_config_from_json(std::string_view text);
ServerConfig load_server_config(const std::filesystem::path &path);

// Creates and tears down staging backends and publishes their ServerInfo.
// Memserver endpoints run in this process; directory backends only need
// their shard directories created.
class ServerManager {
public:
  explicit ServerManager(ServerConfig config);
  ~ServerManager();
  ServerManager(const ServerManager &) = delete;
  ServerManager &operator=(const ServerManager &) = delete;

  // Every listener accepts connections (or every shard directory exists)
  // before this returns. The info file is written only on success.
  const datastore::ServerInfo &start_server();

  // Closes listeners and drops in-memory contents; staged files are left on
  // disk. Calling it twice is harmless.
  void stop_server();

  // Blocks until every memserver endpoint received SHUTDOWN. Returns
  // immediately for directory backends.
  void wait_for_shutdown();

  bool started() const noexcept { return info_.has_value(); }
  const datastore::ServerInfo &get_server_info() const;
  const ServerConfig &config() const noexcept { return config_; }

private:
  ServerConfig config_;
  std::vector<std::unique_ptr<MemServer>> servers_;
  std::optional<datastore::ServerInfo> info_;
};

// Sends SHUTDOWN to every memserver endpoint in info. Unreachable endpoints
// are skipped; returns how many acknowledged.
std::size_t send_shutdown(const datastore::ServerInfo &info);

// PING round trip against one endpoint; false on any transport failure.
bool ping(const std::string &endpoint);

} // namespace stagebench::server
