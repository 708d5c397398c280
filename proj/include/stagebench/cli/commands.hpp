#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stagebench::cli {

// Process exit codes shared by every subcommand.
inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

struct PatternOptions {
  std::string backend = "filesystem";
  std::vector<std::uint64_t> payload_bytes{1258291};
  std::int64_t sim_steps = 2000;
  std::int64_t write_interval = 100;
  std::int64_t trainer_iters = 500;
  std::int64_t read_interval = 10;
  double sim_time = 0.003;
  double ai_time = 0.006;
  bool sim_busy = true;
  bool ai_busy = true;
  std::vector<std::size_t> sim_kernel_size{64, 64};
  int keys_per_snapshot = 2;
  std::int64_t stop_check_interval = 10;
  bool steer = true;
  std::uint64_t seed = 42;
  std::string out;
  std::string server_info; // use a running backend instead of starting one
  std::string run_id;      // empty: generated
  int sim_ranks = 1;
  int trainer_ranks = 1;
  int endpoints = 1;        // memserver endpoints started in-process
  std::size_t shards = 8;   // directory backends
  std::vector<std::string> roots;
  double grace_period = 10.0;
  double poll_deadline = 300.0;

  // pattern2 only
  int producers = 4;
  std::int64_t intervals = 20; // trainer updates
  int stall_producer = -1;
  std::int64_t stall_snapshot = 0;
  double stall_seconds = 0.0;
};

// Full-scale iteration times, step/iteration counts and sim kernel size on
// top of the desk defaults.
void apply_paper_scale(PatternOptions &opts);

// Overrides options from a JSON object whose keys are the long flag names
// with '-' or '_'. Throws Error(invalid_argument) for unknown keys.
void apply_config_file(PatternOptions &opts, const std::filesystem::path &path);

// One run per payload size. Prints each run directory on stdout.
int cmd_pattern1(const PatternOptions &opts);
int cmd_pattern2(const PatternOptions &opts);

struct ReportOptions {
  std::filesystem::path events_dir;
  std::string format = "csv";  // csv | json
  std::string table = "summary"; // summary | throughput
  bool timeline = false;
  std::filesystem::path out_dir; // timeline output; default events_dir
  std::string backend = "unknown";
  std::size_t warmup_skip = 0;
};
int cmd_report(const ReportOptions &opts);

struct ServerStartOptions {
  std::string config;
  std::string backend = "memserver";
  std::vector<std::string> bind;
  std::vector<std::string> roots;
  std::size_t shards = 8;
  std::string info;
};
int cmd_server_start(const ServerStartOptions &opts);
int cmd_server_stop(const std::filesystem::path &info);

struct ComponentOptions {
  std::filesystem::path config;
  std::filesystem::path server_info;
  std::string rank = "0"; // number, or "{rank}"/"auto" to read the MPI environment
  std::string events_out;
  std::string summary_out;
};
int cmd_sim(const ComponentOptions &opts);
int cmd_trainer(const ComponentOptions &opts);

struct RunOptions {
  std::filesystem::path workflow;
  std::string out;
  std::string run_id;
};
int cmd_run(const RunOptions &opts);

int cmd_crc32(const std::string &key);

struct SelftestOptions {
  std::string root; // filesystem root for the smoke run; default a temp dir
  double smoke_seconds = 5.0;
};
int cmd_selftest(const SelftestOptions &opts);

// Rank from "{rank}"/"auto" (OMPI_COMM_WORLD_RANK, PMI_RANK, PALS_RANKID) or a number.
int resolve_rank(const std::string &spec);

// Absolute path of the running executable.
std::string self_exe();

} // namespace stagebench::cli
