#include "stagebench/datastore/datastore.hpp"

#include "stagebench/common/clock.hpp"
#include "stagebench/common/error.hpp"
#include "stagebench/datastore/key_codec.hpp"
#include "stagebench/server/wire.hpp"

#include <algorithm>
#include <thread>

namespace stagebench::datastore {

DataStoreClient::DataStoreClient(ServerInfo info, std::string client_id,
                                 double poll_interval_default)
    : info_(std::move(info)), client_id_(std::move(client_id)),
      poll_interval_(poll_interval_default) {
  validate(info_);
  if (poll_interval_ <= 0.0) {
    throw Error(Errc::invalid_argument, "poll interval must be > 0");
  }
  if (is_directory_backend(info_.kind)) {
    backend_ = make_directory_backend(info_, client_id_);
  } else {
    backend_ = make_memserver_backend(info_);
  }
}

DataStoreClient::~DataStoreClient() = default;
DataStoreClient::DataStoreClient(DataStoreClient &&) noexcept = default;
DataStoreClient &DataStoreClient::operator=(DataStoreClient &&) noexcept = default;

std::int64_t DataStoreClient::stage_write(std::string_view key, ByteView value) {
  validate_key(key);
  if (value.size() > wire::max_value_len) {
    throw Error(Errc::invalid_argument, "value exceeds 2^31-1 bytes");
  }
  const auto committed = backend_->put(std::string(key), value);
  return committed != 0 ? committed : monotonic_ns();
}

std::optional<Bytes> DataStoreClient::stage_read(std::string_view key) {
  validate_key(key);
  return backend_->get(std::string(key));
}

bool DataStoreClient::exists(std::string_view key) {
  validate_key(key);
  return backend_->exists(std::string(key));
}

bool DataStoreClient::poll_staged_data(const std::vector<std::string> &keys,
                                       double timeout, double interval) {
  if (keys.empty()) {
    throw Error(Errc::invalid_argument, "poll requires at least one key");
  }
  if (timeout < 0.0) {
    throw Error(Errc::invalid_argument, "poll timeout must be >= 0");
  }
  if (interval < 0.0) {
    interval = poll_interval_;
  }
  if (interval == 0.0) {
    throw Error(Errc::invalid_argument, "poll interval must be > 0");
  }
  for (const auto &k : keys) {
    validate_key(k);
  }

  const auto deadline =
      SteadyClock::now() + std::chrono::duration_cast<SteadyClock::duration>(
                               std::chrono::duration<double>(timeout));
  // Keys already seen stay seen; the store offers no delete-during-poll
  // guarantee worth re-checking for.
  std::vector<bool> seen(keys.size(), false);
  while (true) {
    bool all = true;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (!seen[i]) {
        seen[i] = backend_->exists(keys[i]);
        all = all && seen[i];
        if (!all) {
          break;
        }
      }
    }
    if (all) {
      return true;
    }
    const auto now = SteadyClock::now();
    if (now >= deadline) {
      return false;
    }
    const auto step = std::chrono::duration_cast<SteadyClock::duration>(
        std::chrono::duration<double>(interval));
    std::this_thread::sleep_until(std::min(now + step, deadline));
  }
}

std::size_t DataStoreClient::clean_staged_data(std::string_view prefix) {
  std::size_t removed = 0;
  for (const auto &key : backend_->list(prefix)) {
    if (backend_->remove(key)) {
      ++removed;
    }
  }
  return removed;
}

std::vector<std::string> DataStoreClient::list_keys(std::string_view prefix) {
  return backend_->list(prefix);
}

} // namespace stagebench::datastore
