#pragma once

#include "stagebench/server/socket.hpp"
#include "stagebench/server/wire.hpp"

#include <array>
#include <atomic>
#include <condition_variable>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace stagebench::server {

// Key -> value map split into independently locked partitions. Values are
// immutable once installed; readers take a reference under the partition lock
// and copy/send outside it.
class KeyValueStore {
public:
  static constexpr std::size_t partitions = 64;
  using Value = std::shared_ptr<const Bytes>;

  void put(const std::string &key, Bytes value);
  Value get(const std::string &key) const;
  bool exists(const std::string &key) const;
  bool erase(const std::string &key);
  std::vector<std::string> keys_with_prefix(std::string_view prefix) const;
  void clear();
  std::size_t size() const;

private:
  struct Partition {
    mutable std::mutex mu;
    std::unordered_map<std::string, Value> map;
  };

  Partition &partition_for(const std::string &key);
  const Partition &partition_for(const std::string &key) const;

  std::array<Partition, partitions> parts_;
};

// Applies one request to the store. SHUTDOWN is acknowledged here; acting on
// it is the caller's job.
wire::Response handle_request(wire::Request &req, KeyValueStore &store);

// One listening endpoint of the in-memory staging server. One handler thread
// per connection.
class MemServer {
public:
  explicit MemServer(net::Endpoint bind);
  ~MemServer();
  MemServer(const MemServer &) = delete;
  MemServer &operator=(const MemServer &) = delete;

  // Binds and starts accepting before returning. Throws Error(startup).
  void start();
  // Closes the listener and all connections, discards contents. Idempotent.
  void stop();
  // Blocks until a SHUTDOWN request arrives or stop() is called.
  void wait_for_shutdown();

  bool running() const noexcept { return running_; }
  const net::Endpoint &endpoint() const noexcept { return bound_; }
  KeyValueStore &store() noexcept { return store_; }

private:
  struct Handler {
    std::thread thread;
    int fd = -1;
    std::atomic<bool> done{false};
  };

  void accept_loop();
  void serve(Handler *h);
  void reap_finished();
  void request_shutdown();

  net::Endpoint requested_;
  net::Endpoint bound_;
  net::Socket listener_;
  int wake_pipe_[2] = {-1, -1};
  std::thread acceptor_;
  std::atomic<bool> running_{false};

  std::mutex handlers_mu_;
  std::list<Handler> handlers_;

  std::mutex shutdown_mu_;
  std::condition_variable shutdown_cv_;
  bool shutdown_requested_ = false;

  KeyValueStore store_;
};

} // namespace stagebench::server
