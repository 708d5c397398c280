#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace stagebench::metrics {

enum class EventKind { sim_iter, ai_iter, read, write, poll, init };

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view name) noexcept;

inline bool is_transfer(EventKind k) noexcept {
  return k == EventKind::read || k == EventKind::write;
}
inline bool is_iteration(EventKind k) noexcept {
  return k == EventKind::sim_iter || k == EventKind::ai_iter;
}

// One timed event. t_start is seconds since the run epoch on the host
// monotonic clock.
struct EventRecord {
  std::string component;
  int rank = 0;
  EventKind kind = EventKind::sim_iter;
  double t_start = 0.0;
  double duration = 0.0;
  std::uint64_t bytes = 0;
  std::optional<std::string> key;

  double t_end() const noexcept { return t_start + duration; }
  friend bool operator==(const EventRecord &, const EventRecord &) = default;
};

// Throws Error(invalid_argument): duration must be > 0, rank >= 0,
// read/write need bytes > 0 and a key, iteration and poll events carry no
// bytes.
void validate(const EventRecord &ev);

// One JSON object, no trailing newline.
std::string to_json_line(const EventRecord &ev);
void append_json_line(std::string &out, const EventRecord &ev);

// Throws Error(invalid_argument) on anything that is not a valid event.
EventRecord parse_event_line(std::string_view line);

} // namespace stagebench::metrics
