#pragma once

#include "stagebench/metrics/event.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>

namespace stagebench::metrics {

// Buffered single-writer event log: one JSON object per line. A failed flush
// throws Error(io); callers are expected to abort rather than continue with
// a hole in their timing data.
class Recorder {
public:
  static constexpr std::size_t flush_threshold = 1 << 20;

  Recorder(const std::filesystem::path &path, std::int64_t epoch_ns);
  ~Recorder();
  Recorder(const Recorder &) = delete;
  Recorder &operator=(const Recorder &) = delete;

  void record(const EventRecord &ev);

  // Convenience: stamps t_start/duration from raw monotonic timestamps.
  void record(std::string_view component, int rank, EventKind kind, std::int64_t start_ns,
              std::int64_t end_ns, std::uint64_t bytes = 0,
              std::optional<std::string> key = std::nullopt);

  void flush();
  void close();

  double seconds_since_epoch(std::int64_t ns) const noexcept {
    return static_cast<double>(ns - epoch_ns_) * 1e-9;
  }
  std::int64_t epoch_ns() const noexcept { return epoch_ns_; }
  std::uint64_t count() const noexcept { return count_; }
  const std::filesystem::path &path() const noexcept { return path_; }

private:
  std::filesystem::path path_;
  std::FILE *file_ = nullptr;
  std::int64_t epoch_ns_;
  std::string buffer_;
  std::uint64_t count_ = 0;
};

} // namespace stagebench::metrics
