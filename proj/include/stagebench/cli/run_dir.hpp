#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stagebench::cli {

struct RunManifest {
  std::string run_id;
  std::string pattern; // pattern1 | pattern2 | custom
  std::string backend;
  std::uint64_t payload_bytes = 0;
  int producers = 0;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config; // every resolved option and component config
  std::string output_dir;
};

std::string to_json(const RunManifest &m);
RunManifest manifest_from_json(std::string_view text);

// --out, else $STAGEBENCH_OUT, else ./stagebench-runs.
std::filesystem::path output_root(const std::string &flag);

// <pattern>-<UTC timestamp>-<pid>-<sequence>; unique within a process.
std::string new_run_id(std::string_view pattern);

// Creates the run directory and its events/, summaries/, configs/ and logs/.
void prepare_run_dir(const std::filesystem::path &dir);

struct ReportRequest {
  std::string backend;
  // Trainer whose events feed the exec_time_per_iteration row.
  std::optional<std::string> trainer;
  std::size_t trainer_iters = 0;
  std::size_t warmup_skip = 5;
  std::string title;
};

// Aggregates <dir>/events into summary.csv, summary_nowarmup.csv,
// throughput.csv, timeline.json and timeline.svg. Throws Error(empty_report)
// when there are no events.
void write_reports(const std::filesystem::path &dir, const ReportRequest &req);

// Problems with a finished run directory; empty when it is complete.
// Custom runs are not required to carry events or summaries.
std::vector<std::string> check_run_dir(const std::filesystem::path &dir);

} // namespace stagebench::cli
