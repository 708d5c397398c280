#include "stagebench/common/clock.hpp"
#include "stagebench/common/error.hpp"
#include "stagebench/datastore/crc32.hpp"
#include "stagebench/datastore/datastore.hpp"
#include "stagebench/datastore/key_codec.hpp"

#include <dirent.h>
#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <random>

namespace stagebench::datastore {

namespace {

constexpr std::string_view kValueSuffix = ".val";
constexpr std::string_view kTempPrefix = ".tmp-";

class Fd {
public:
  explicit Fd(int fd) noexcept : fd_(fd) {}
  ~Fd() {
    if (fd_ >= 0) {
      ::close(fd_);
    }
  }
  Fd(const Fd &) = delete;
  Fd &operator=(const Fd &) = delete;
  int get() const noexcept { return fd_; }
  int release() noexcept { return std::exchange(fd_, -1); }

private:
  int fd_;
};

// Sharded key-value store over plain directories:
//   <root>/shard_<i>/<encode_key(key)>.val
// Shard i lives under roots[i % roots.size()]. Writes go to a temp file in
// the destination shard directory and are published by rename(2), so a
// reader sees either the old value, nothing, or the complete new value.
class DirectoryBackend final : public Backend {
public:
  DirectoryBackend(const ServerInfo &info, const std::string &client_id)
      : roots_(info.roots), shard_count_(info.shard_count),
        client_tag_(encode_key(client_id.empty() ? std::string("client") : client_id)),
        rng_(std::random_device{}()) {}

  std::int64_t put(const std::string &key, ByteView value) override {
    const std::string dir = shard_dir(key);
    char rnd[17];
    std::snprintf(rnd, sizeof(rnd), "%016llx", static_cast<unsigned long long>(rng_()));
    const std::string tmp = dir + "/" + std::string(kTempPrefix) + client_tag_ + "-" +
                            std::to_string(counter_++) + "-" + rnd;
    const std::string dst = value_path(dir, key);

    Fd fd(::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644));
    if (fd.get() < 0) {
      if (errno == ENOENT) {
        throw Error(Errc::not_initialized, "shard directory missing: " + dir);
      }
      if (errno == ENAMETOOLONG) {
        throw Error(Errc::invalid_argument, "encoded key too long for filesystem");
      }
      throw_errno(Errc::io, "open " + tmp);
    }
    std::size_t off = 0;
    while (off < value.size()) {
      const ssize_t n = ::write(fd.get(), value.data() + off, value.size() - off);
      if (n < 0) {
        if (errno == EINTR) {
          continue;
        }
        const int err = errno;
        ::unlink(tmp.c_str());
        errno = err;
        throw_errno(Errc::io, "write " + tmp);
      }
      off += static_cast<std::size_t>(n);
    }
    if (::close(fd.release()) != 0) {
      ::unlink(tmp.c_str());
      throw_errno(Errc::io, "close " + tmp);
    }
    const auto committed = monotonic_ns();
    if (::rename(tmp.c_str(), dst.c_str()) != 0) {
      const int err = errno;
      ::unlink(tmp.c_str());
      errno = err;
      if (err == ENAMETOOLONG) {
        throw Error(Errc::invalid_argument, "encoded key too long for filesystem");
      }
      throw_errno(Errc::io, "rename " + tmp);
    }
    return committed;
  }

  std::optional<Bytes> get(const std::string &key) override {
    const std::string path = value_path(shard_dir(key), key);
    Fd fd(::open(path.c_str(), O_RDONLY | O_CLOEXEC));
    if (fd.get() < 0) {
      if (errno == ENOENT) {
        check_shard_dir(key);
        return std::nullopt;
      }
      throw_errno(Errc::io, "open " + path);
    }
    struct stat st {};
    if (::fstat(fd.get(), &st) != 0) {
      throw_errno(Errc::io, "fstat " + path);
    }
    Bytes out(static_cast<std::size_t>(st.st_size));
    std::size_t off = 0;
    while (off < out.size()) {
      const ssize_t n = ::read(fd.get(), out.data() + off, out.size() - off);
      if (n < 0) {
        if (errno == EINTR) {
          continue;
        }
        throw_errno(Errc::io, "read " + path);
      }
      if (n == 0) {
        // The inode is immutable once published; a short read means the
        // file was truncated by something outside this protocol.
        throw Error(Errc::io, "short read on " + path);
      }
      off += static_cast<std::size_t>(n);
    }
    return out;
  }

  bool exists(const std::string &key) override {
    const std::string path = value_path(shard_dir(key), key);
    struct stat st {};
    if (::stat(path.c_str(), &st) == 0) {
      return true;
    }
    if (errno != ENOENT) {
      throw_errno(Errc::io, "stat " + path);
    }
    check_shard_dir(key);
    return false;
  }

  std::vector<std::string> list(std::string_view prefix) override {
    std::vector<std::string> keys;
    for (std::size_t shard = 0; shard < shard_count_; ++shard) {
      const std::string dir = shard_dir_of(shard);
      DIR *d = ::opendir(dir.c_str());
      if (d == nullptr) {
        if (errno == ENOENT) {
          throw Error(Errc::not_initialized, "shard directory missing: " + dir);
        }
        throw_errno(Errc::io, "opendir " + dir);
      }
      while (const dirent *ent = ::readdir(d)) {
        std::string_view name(ent->d_name);
        // Temp names end in hex digits, so the suffix alone excludes them.
        if (!name.ends_with(kValueSuffix)) {
          continue;
        }
        name.remove_suffix(kValueSuffix.size());
        auto key = decode_key(name);
        if (key && key->starts_with(prefix)) {
          keys.push_back(std::move(*key));
        }
      }
      ::closedir(d);
    }
    std::sort(keys.begin(), keys.end());
    return keys;
  }

  bool remove(const std::string &key) override {
    const std::string path = value_path(shard_dir(key), key);
    if (::unlink(path.c_str()) == 0) {
      return true;
    }
    if (errno == ENOENT) {
      return false;
    }
    throw_errno(Errc::io, "unlink " + path);
  }

private:
  std::string shard_dir_of(std::size_t shard) const {
    return roots_[shard % roots_.size()] + "/shard_" + std::to_string(shard);
  }

  std::string shard_dir(const std::string &key) const {
    return shard_dir_of(shard_of(key, shard_count_));
  }

  static std::string value_path(const std::string &dir, const std::string &key) {
    return dir + "/" + encode_key(key) + std::string(kValueSuffix);
  }

  void check_shard_dir(const std::string &key) const {
    const std::string dir = shard_dir(key);
    struct stat st {};
    if (::stat(dir.c_str(), &st) != 0 || !S_ISDIR(st.st_mode)) {
      throw Error(Errc::not_initialized, "shard directory missing: " + dir);
    }
  }

  std::vector<std::string> roots_;
  std::size_t shard_count_;
  std::string client_tag_;
  std::uint64_t counter_ = 0;
  std::mt19937_64 rng_;
};

} // namespace

std::unique_ptr<Backend> make_directory_backend(const ServerInfo &info,
                                                const std::string &client_id) {
  return std::make_unique<DirectoryBackend>(info, client_id);
}

} // namespace stagebench::datastore
