#pragma once

#include "stagebench/components/config.hpp"
#include "stagebench/workflow/graph.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace stagebench::components {

// Where a planned run keeps its files and how components are invoked.
struct PlanPaths {
  std::string exe; // binary providing the `sim` and `trainer` subcommands
  std::filesystem::path run_dir;
  std::filesystem::path server_info;
  int sim_ranks = 1;
  int trainer_ranks = 1;

  std::filesystem::path config_path(const std::string &name) const {
    return run_dir / "configs" / (name + ".json");
  }
  std::filesystem::path events_path(const std::string &name, const std::string &rank) const {
    return run_dir / "events" / (name + ".r" + rank + ".jsonl");
  }
  std::filesystem::path summary_path(const std::string &name, const std::string &rank) const {
    return run_dir / "summaries" / (name + ".r" + rank + ".json");
  }
};

struct PatternPlan {
  workflow::WorkflowGraph graph;
  std::vector<SimComponentConfig> sims;
  TrainerComponentConfig trainer;
};

// argv template for one component process; {rank} is substituted by the launcher.
std::vector<std::string> component_command(const PlanPaths &paths, const std::string &role,
                                           const std::string &name);

// One simulation and one asynchronous trainer, no edges. The trainer's view
// of the producer (cadence, key count, payload) is copied from the sim, and
// with steering on the sim watches "<trainer>.stop". Config files are written
// under run_dir/configs.
PatternPlan build_pattern1(SimComponentConfig sim, TrainerComponentConfig trainer,
                           const PlanPaths &paths);

// n_producers simulations sim0..sim<n-1> built from `sim`, and one blocking
// trainer reading from all of them. Seeds differ per producer.
PatternPlan build_pattern2(int n_producers, SimComponentConfig sim, TrainerComponentConfig trainer,
                           const PlanPaths &paths);

} // namespace stagebench::components
