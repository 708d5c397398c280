#pragma once

#include "stagebench/metrics/event.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stagebench::metrics {

inline constexpr double bytes_per_gib = 1073741824.0; // 2^30

struct EventLog {
  std::vector<EventRecord> events;
  std::size_t malformed_lines = 0; // complete lines that failed to parse
  std::size_t partial_lines = 0;   // unterminated final lines, dropped
};

// Reads every file; never throws for bad lines, only counts them.
EventLog load_events(const std::vector<std::filesystem::path> &files);

// Every *.jsonl file below dir, sorted.
std::vector<std::filesystem::path> find_event_files(const std::filesystem::path &dir);

struct SummaryRow {
  std::string component;
  std::string kind;
  std::size_t count = 0;
  double mean_s = 0.0;
  double std_s = 0.0; // n-1 denominator; 0 with single_sample set when n == 1
  std::uint64_t total_bytes = 0;
  double mean_gibps = 0.0;
  double std_gibps = 0.0;
  bool single_sample = false;
};

struct SummaryStats {
  std::vector<SummaryRow> rows; // sorted by (component, kind)
  std::size_t events_total = 0;
  std::size_t malformed_lines = 0;
  std::size_t partial_lines = 0;
};

// Pools events per (component, kind) across ranks and files. warmup_skip
// drops the first N events of every (component, rank, kind) stream.
// Throws Error(empty_report) when nothing is left to summarize.
SummaryStats summarize(const std::vector<EventRecord> &events, std::size_t warmup_skip = 0);
SummaryStats aggregate(const std::vector<std::filesystem::path> &files,
                       std::size_t warmup_skip = 0);

inline constexpr std::string_view summary_csv_header =
    "component,kind,count,mean_s,std_s,total_bytes,mean_gibps,std_gibps";

std::string to_csv(const SummaryStats &stats);
std::string to_json(const SummaryStats &stats);

struct ThroughputPoint {
  std::string backend;
  std::uint64_t payload_bytes = 0;
  std::string direction; // "read" | "write"
  double mean_gibps = 0.0;
  double std_gibps = 0.0;
  std::size_t n = 0;
};

// Groups transfer events by (payload bytes, direction); one event's
// throughput is bytes / duration in GiB/s.
std::vector<ThroughputPoint> throughput_table(const std::vector<EventRecord> &events,
                                              const std::string &backend);

inline constexpr std::string_view throughput_csv_header =
    "backend,payload_bytes,direction,mean_gibps,std_gibps,n";

std::string to_csv(const std::vector<ThroughputPoint> &points);

// (last event end - first event start) / total_iters over the given events.
// Throws Error(invalid_argument) for total_iters == 0 or no events.
double exec_time_per_iteration(const std::vector<EventRecord> &events, std::size_t total_iters);

// Shortest round-trip decimal (%.15g) used in every report.
std::string format_number(double v);

} // namespace stagebench::metrics
