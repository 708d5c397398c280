#pragma once

#include "stagebench/workflow/graph.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stagebench::workflow {

struct LauncherConfig {
  // Used for placement=remote. {launcher}, {ranks}, {name} and {command}
  // are substituted; {command} expands to the component's argv.
  std::string remote_template = "{launcher} -n {ranks} {command}";
  std::string launcher = "mpirun";
  // Seconds between SIGTERM and SIGKILL when tearing down after a failure.
  double grace_period = 10.0;
  // When set, each process's stdout/stderr go to <log_dir>/<name>.r<rank>.log.
  std::filesystem::path log_dir;
  // Monotonic timestamp that report times are relative to; 0 means launch time.
  std::int64_t epoch_ns = 0;
};

struct ComponentResult {
  std::string name;
  bool launched = false;
  double start_time = 0.0; // seconds since launch began
  double end_time = 0.0;
  int exit_code = -1; // 128+signal when killed; -1 when never launched
};

struct LaunchReport {
  std::vector<ComponentResult> components; // sorted by name
  double makespan = 0.0;
  bool success = false;
  std::string error;
  std::int64_t epoch_ns = 0; // monotonic clock at launch start

  const ComponentResult &at(const std::string &name) const;
};

std::string to_json(const LaunchReport &report);

// The argv each process of a component runs, one entry per spawned process.
std::vector<std::vector<std::string>> expand_commands(const ComponentSpec &spec,
                                                      const LauncherConfig &cfg);

// Runs the validated graph stage by stage. Every component of a stage is
// spawned before any is awaited. The first nonzero exit (or spawn failure)
// fails the run: running peers get SIGTERM, then SIGKILL after the grace
// period, and later stages are skipped. All children are reaped before
// returning. Throws Error(validation) when the graph is invalid.
LaunchReport launch(const WorkflowGraph &graph, const LauncherConfig &cfg = {});

} // namespace stagebench::workflow
