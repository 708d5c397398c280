#include "stagebench/metrics/aggregate.hpp"

#include "stagebench/common/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

namespace stagebench::metrics {

namespace {

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;
};

// Two-pass mean and sample standard deviation.
Moments moments(const std::vector<double> &xs) {
  Moments m;
  m.n = xs.size();
  if (m.n == 0) {
    return m;
  }
  double sum = 0.0;
  for (const double x : xs) {
    sum += x;
  }
  m.mean = sum / static_cast<double>(m.n);
  if (m.n > 1) {
    double ss = 0.0;
    for (const double x : xs) {
      ss += (x - m.mean) * (x - m.mean);
    }
    m.std = std::sqrt(ss / static_cast<double>(m.n - 1));
  }
  return m;
}

double gibps(const EventRecord &ev) {
  return static_cast<double>(ev.bytes) / ev.duration / bytes_per_gib;
}

} // namespace

std::string format_number(double v) { return fmt::format("{:.15g}", v); }

EventLog load_events(const std::vector<std::filesystem::path> &files) {
  EventLog log;
  for (const auto &path : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw Error(Errc::io, "cannot open event file " + path.string());
    }
    const std::string content((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    while (pos < content.size()) {
      const auto nl = content.find('\n', pos);
      if (nl == std::string::npos) {
        ++log.partial_lines;
        break;
      }
      const std::string_view line(content.data() + pos, nl - pos);
      pos = nl + 1;
      if (line.empty()) {
        continue;
      }
      try {
        log.events.push_back(parse_event_line(line));
      } catch (const Error &) {
        ++log.malformed_lines;
      }
    }
  }
  return log;
}

std::vector<std::filesystem::path> find_event_files(const std::filesystem::path &dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) {
    return out;
  }
  for (const auto &entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

SummaryStats summarize(const std::vector<EventRecord> &events, std::size_t warmup_skip) {
  // Streams are ordered by start time so "first N" means the earliest.
  std::vector<const EventRecord *> sorted;
  sorted.reserve(events.size());
  for (const auto &ev : events) {
    sorted.push_back(&ev);
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto *a, const auto *b) {
    return a->t_start < b->t_start;
  });

  std::map<std::tuple<std::string, int, EventKind>, std::size_t> seen;
  std::map<std::pair<std::string, std::string>, std::vector<const EventRecord *>> groups;
  for (const auto *ev : sorted) {
    auto &n = seen[{ev->component, ev->rank, ev->kind}];
    if (n++ < warmup_skip) {
      continue;
    }
    groups[{ev->component, std::string(to_string(ev->kind))}].push_back(ev);
  }

  SummaryStats stats;
  for (const auto &[key, evs] : groups) {
    std::vector<double> durations;
    std::vector<double> rates;
    SummaryRow row;
    row.component = key.first;
    row.kind = key.second;
    for (const auto *ev : evs) {
      durations.push_back(ev->duration);
      row.total_bytes += ev->bytes;
      if (ev->bytes > 0) {
        rates.push_back(gibps(*ev));
      }
    }
    const auto d = moments(durations);
    const auto r = moments(rates);
    row.count = d.n;
    row.mean_s = d.mean;
    row.std_s = d.std;
    row.single_sample = d.n == 1;
    row.mean_gibps = r.mean;
    row.std_gibps = r.std;
    stats.events_total += d.n;
    stats.rows.push_back(std::move(row));
  }
  if (stats.events_total == 0) {
    throw Error(Errc::empty_report, "no events found");
  }
  return stats;
}

SummaryStats aggregate(const std::vector<std::filesystem::path> &files, std::size_t warmup_skip) {
  const EventLog log = load_events(files);
  SummaryStats stats = summarize(log.events, warmup_skip);
  stats.malformed_lines = log.malformed_lines;
  stats.partial_lines = log.partial_lines;
  return stats;
}

std::string to_csv(const SummaryStats &stats) {
  std::string out(summary_csv_header);
  out.push_back('\n');
  for (const auto &r : stats.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.component, r.kind, r.count,
                       format_number(r.mean_s), format_number(r.std_s), r.total_bytes,
                       format_number(r.mean_gibps), format_number(r.std_gibps));
  }
  return out;
}

std::string to_json(const SummaryStats &stats) {
  nlohmann::ordered_json j;
  j["units"] = {{"time", "s"}, {"throughput", "GiB/s (2^30 bytes)"}};
  j["events_total"] = stats.events_total;
  j["malformed_lines"] = stats.malformed_lines;
  j["partial_lines"] = stats.partial_lines;
  auto rows = nlohmann::ordered_json::array();
  for (const auto &r : stats.rows) {
    rows.push_back({{"component", r.component},
                    {"kind", r.kind},
                    {"count", r.count},
                    {"mean_s", r.mean_s},
                    {"std_s", r.std_s},
                    {"total_bytes", r.total_bytes},
                    {"mean_gibps", r.mean_gibps},
                    {"std_gibps", r.std_gibps},
                    {"single_sample", r.single_sample}});
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::vector<ThroughputPoint> throughput_table(const std::vector<EventRecord> &events,
                                              const std::string &backend) {
  std::map<std::pair<std::uint64_t, std::string>, std::vector<double>> groups;
  for (const auto &ev : events) {
    if (!is_transfer(ev.kind)) {
      continue;
    }
    groups[{ev.bytes, std::string(to_string(ev.kind))}].push_back(gibps(ev));
  }
  std::vector<ThroughputPoint> out;
  for (const auto &[key, rates] : groups) {
    const auto m = moments(rates);
    out.push_back({backend, key.first, key.second, m.mean, m.std, m.n});
  }
  return out;
}

std::string to_csv(const std::vector<ThroughputPoint> &points) {
  std::string out(throughput_csv_header);
  out.push_back('\n');
  for (const auto &p : points) {
    out += fmt::format("{},{},{},{},{},{}\n", p.backend, p.payload_bytes, p.direction,
                       format_number(p.mean_gibps), format_number(p.std_gibps), p.n);
  }
  return out;
}

double exec_time_per_iteration(const std::vector<EventRecord> &events, std::size_t total_iters) {
  if (total_iters == 0) {
    throw Error(Errc::invalid_argument, "total_iters must be > 0");
  }
  if (events.empty()) {
    throw Error(Errc::invalid_argument, "no trainer events");
  }
  double first = events.front().t_start;
  double last = events.front().t_end();
  for (const auto &ev : events) {
    first = std::min(first, ev.t_start);
    last = std::max(last, ev.t_end());
  }
  return (last - first) / static_cast<double>(total_iters);
}

} // namespace stagebench::metrics
