#include "stagebench/metrics/recorder.hpp"

#include "stagebench/common/error.hpp"

#include <algorithm>

namespace stagebench::metrics {

Recorder::Recorder(const std::filesystem::path &path, std::int64_t epoch_ns)
    : path_(path), epoch_ns_(epoch_ns) {
  if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
  file_ = std::fopen(path_.c_str(), "w");
  if (file_ == nullptr) {
    throw_errno(Errc::io, "open event log " + path_.string());
  }
  buffer_.reserve(flush_threshold + 4096);
}

Recorder::~Recorder() {
  try {
    close();
  } catch (...) {
  }
}

void Recorder::record(const EventRecord &ev) {
  validate(ev);
  append_json_line(buffer_, ev);
  buffer_.push_back('\n');
  ++count_;
  if (buffer_.size() >= flush_threshold) {
    flush();
  }
}

void Recorder::record(std::string_view component, int rank, EventKind kind,
                      std::int64_t start_ns, std::int64_t end_ns, std::uint64_t bytes,
                      std::optional<std::string> key) {
  EventRecord ev;
  ev.component = std::string(component);
  ev.rank = rank;
  ev.kind = kind;
  ev.t_start = seconds_since_epoch(start_ns);
  // Clock reads are nanosecond-granular; a zero span is a timer artifact.
  ev.duration = static_cast<double>(std::max<std::int64_t>(end_ns - start_ns, 1)) * 1e-9;
  ev.bytes = bytes;
  ev.key = std::move(key);
  record(ev);
}

void Recorder::flush() {
  if (file_ == nullptr) {
    throw Error(Errc::io, "event log " + path_.string() + " is closed");
  }
  if (!buffer_.empty()) {
    if (std::fwrite(buffer_.data(), 1, buffer_.size(), file_) != buffer_.size()) {
      throw_errno(Errc::io, "write event log " + path_.string());
    }
    buffer_.clear();
  }
  if (std::fflush(file_) != 0) {
    throw_errno(Errc::io, "flush event log " + path_.string());
  }
}

void Recorder::close() {
  if (file_ == nullptr) {
    return;
  }
  flush();
  std::fclose(file_);
  file_ = nullptr;
}

} // namespace stagebench::metrics
