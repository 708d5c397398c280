#include "stagebench/cli/run_dir.hpp"

#include "stagebench/common/error.hpp"
#include "stagebench/components/config.hpp"
#include "stagebench/metrics/aggregate.hpp"
#include "stagebench/metrics/timeline.hpp"

#include <fmt/format.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <tuple>

namespace stagebench::cli {

namespace fs = std::filesystem;
using components::read_text_file;
using components::write_text_file;

std::string to_json(const RunManifest &m) {
  nlohmann::ordered_json j;
  j["run_id"] = m.run_id;
  j["pattern"] = m.pattern;
  j["backend"] = m.backend;
  j["payload_bytes"] = m.payload_bytes;
  j["producers"] = m.producers;
  j["seed"] = m.seed;
  j["output_dir"] = m.output_dir;
  j["config"] = m.config;
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.pattern = j.at("pattern").get<std::string>();
    m.backend = j.at("backend").get<std::string>();
    m.payload_bytes = j.at("payload_bytes").get<std::uint64_t>();
    m.producers = j.at("producers").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.output_dir = j.at("output_dir").get<std::string>();
    m.config = j.at("config");
    return m;
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::validation, std::string("manifest: ") + e.what());
  }
}

fs::path output_root(const std::string &flag) {
  if (!flag.empty()) {
    return flag;
  }
  if (const char *env = std::getenv("STAGEBENCH_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "stagebench-runs";
}

std::string new_run_id(std::string_view pattern) {
  static std::atomic<int> seq{0};
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  return fmt::format("{}-{}-{}-{}", pattern, stamp, ::getpid(), seq++);
}

void prepare_run_dir(const fs::path &dir) {
  for (const char *sub : {"events", "summaries", "configs", "logs"}) {
    fs::create_directories(dir / sub);
  }
}

void write_reports(const fs::path &dir, const ReportRequest &req) {
  const auto log = metrics::load_events(metrics::find_event_files(dir / "events"));
  auto stats = metrics::summarize(log.events);
  stats.malformed_lines = log.malformed_lines;
  stats.partial_lines = log.partial_lines;

  if (req.trainer) {
    std::vector<metrics::EventRecord> trainer_events;
    for (const auto &ev : log.events) {
      if (ev.component == *req.trainer && ev.kind != metrics::EventKind::init) {
        trainer_events.push_back(ev);
      }
    }
    metrics::SummaryRow row;
    row.component = *req.trainer;
    row.kind = "exec_time_per_iteration";
    row.count = req.trainer_iters;
    row.mean_s = metrics::exec_time_per_iteration(trainer_events, req.trainer_iters);
    stats.rows.push_back(row);
    std::sort(stats.rows.begin(), stats.rows.end(), [](const auto &a, const auto &b) {
      return std::tie(a.component, a.kind) < std::tie(b.component, b.kind);
    });
  }
  write_text_file(dir / "summary.csv", metrics::to_csv(stats));
  write_text_file(dir / "summary.json", metrics::to_json(stats));

  try {
    write_text_file(dir / "summary_nowarmup.csv",
                    metrics::to_csv(metrics::summarize(log.events, req.warmup_skip)));
  } catch (const Error &e) {
    if (e.code() != Errc::empty_report) {
      throw;
    }
    write_text_file(dir / "summary_nowarmup.csv", std::string(metrics::summary_csv_header) + "\n");
  }

  write_text_file(dir / "throughput.csv",
                  metrics::to_csv(metrics::throughput_table(log.events, req.backend)));
  const auto tl = metrics::build_timeline(log.events);
  write_text_file(dir / "timeline.json", metrics::to_json(tl));
  write_text_file(dir / "timeline.svg", metrics::to_svg(tl, req.title));
}

std::vector<std::string> check_run_dir(const fs::path &dir) {
  std::vector<std::string> problems;
  auto need_file = [&](const fs::path &p) {
    if (!fs::is_regular_file(p)) {
      problems.push_back("missing " + p.string());
      return false;
    }
    return true;
  };

  std::string pattern = "custom";
  if (need_file(dir / "manifest.json")) {
    try {
      pattern = manifest_from_json(read_text_file(dir / "manifest.json")).pattern;
    } catch (const Error &e) {
      problems.push_back(e.what());
    }
  }
  if (need_file(dir / "launch_report.json")) {
    try {
      const auto j = nlohmann::json::parse(read_text_file(dir / "launch_report.json"));
      if (!j.contains("success") || !j.contains("components")) {
        problems.push_back("launch_report.json lacks success/components");
      }
    } catch (const nlohmann::json::exception &e) {
      problems.push_back(std::string("launch_report.json: ") + e.what());
    }
  }
  if (pattern == "custom") {
    return problems;
  }

  if (metrics::find_event_files(dir / "events").empty()) {
    problems.push_back("no per-rank event logs under " + (dir / "events").string());
  }
  if (need_file(dir / "summary.csv")) {
    const auto text = read_text_file(dir / "summary.csv");
    if (text.rfind(metrics::summary_csv_header, 0) != 0) {
      problems.push_back("summary.csv has an unexpected header");
    }
  }
  return problems;
}

} // namespace stagebench::cli
