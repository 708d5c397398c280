#pragma once

#include "stagebench/metrics/event.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stagebench::metrics {

enum class SpanCategory { compute, transfer, init, wait };

std::string_view to_string(SpanCategory c) noexcept;

struct Span {
  SpanCategory category = SpanCategory::compute;
  std::string kind; // event kind the span came from
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t merged = 1; // compute spans: number of back-to-back iterations
  std::optional<std::string> key;
};

struct Lane {
  std::string component;
  std::vector<Span> spans;
};

struct Timeline {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<Lane> lanes; // sorted by component; only lanes with spans
};

struct TimelineOptions {
  double t0 = -1e300;
  double t1 = 1e300;
  // Consecutive iteration spans closer than this collapse into one.
  double merge_gap = 1e-3;
};

// Keeps events overlapping [t0, t1]; one lane per component (ranks pooled).
Timeline build_timeline(const std::vector<EventRecord> &events, const TimelineOptions &opts = {});

std::string to_json(const Timeline &tl);
std::string to_svg(const Timeline &tl, const std::string &title = "");

} // namespace stagebench::metrics
