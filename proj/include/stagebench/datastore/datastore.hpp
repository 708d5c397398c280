#pragma once

#include "stagebench/common/bytes.hpp"
#include "stagebench/datastore/server_info.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stagebench::datastore {

inline constexpr double default_poll_interval = 0.010;

// Storage substrate behind DataStoreClient. Implementations provide per-key
// atomic visibility; nothing here is safe to share between threads.
class Backend {
public:
  virtual ~Backend() = default;

  // Returns a monotonic ns timestamp no later than the moment the value
  // became visible to other clients, or 0 when the backend cannot give one.
  virtual std::int64_t put(const std::string &key, ByteView value) = 0;
  virtual std::optional<Bytes> get(const std::string &key) = 0;
  virtual bool exists(const std::string &key) = 0;
  // Keys starting with prefix, sorted.
  virtual std::vector<std::string> list(std::string_view prefix) = 0;
  // True when the key existed and was removed by this call.
  virtual bool remove(const std::string &key) = 0;
};

std::unique_ptr<Backend> make_directory_backend(const ServerInfo &info,
                                                const std::string &client_id);
std::unique_ptr<Backend> make_memserver_backend(const ServerInfo &info);

// Unified client over every staging backend. Two clients built from the same
// ServerInfo observe the same key space; a client holds no staged data.
class DataStoreClient {
public:
  DataStoreClient(ServerInfo info, std::string client_id,
                  double poll_interval_default = default_poll_interval);
  ~DataStoreClient();
  DataStoreClient(DataStoreClient &&) noexcept;
  DataStoreClient &operator=(DataStoreClient &&) noexcept;

  // Last completed write wins. Throws invalid_argument for bad keys or
  // values over 2^31-1 bytes, not_initialized when a directory root is
  // missing, transport when a server is unreachable.
  //
  // Returns the monotonic ns to log as the write's end. Directory backends
  // stamp it just before the atomic rename, so no reader can observe the
  // value earlier; the memserver stamps it on receipt of the reply.
  std::int64_t stage_write(std::string_view key, ByteView value);
  std::int64_t stage_write(std::string_view key, std::string_view value) {
    return stage_write(key, as_bytes(value));
  }

  // nullopt when the key was never written (or was cleaned).
  std::optional<Bytes> stage_read(std::string_view key);

  // True once every key exists; false after `timeout` seconds. A negative
  // interval selects the client default.
  bool poll_staged_data(const std::vector<std::string> &keys, double timeout,
                        double interval = -1.0);

  // Removes every key starting with prefix; returns how many were removed.
  // Writes racing with the clean may survive.
  std::size_t clean_staged_data(std::string_view prefix);

  bool exists(std::string_view key);
  std::vector<std::string> list_keys(std::string_view prefix);

  const ServerInfo &server_info() const noexcept { return info_; }
  const std::string &client_id() const noexcept { return client_id_; }
  double poll_interval_default() const noexcept { return poll_interval_; }

private:
  ServerInfo info_;
  std::string client_id_;
  double poll_interval_;
  std::unique_ptr<Backend> backend_;
};

} // namespace stagebench::datastore
