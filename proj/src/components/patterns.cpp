#include "stagebench/components/patterns.hpp"

#include "stagebench/common/error.hpp"
#include "stagebench/components/snapshot.hpp"

namespace stagebench::components {

namespace {

void link_trainer(TrainerComponentConfig &trainer, const SimComponentConfig &sim,
                  const PlanPaths &paths) {
  trainer.keys_per_snapshot = sim.keys_per_snapshot;
  trainer.producer_write_interval = sim.write_interval;
  trainer.payload_bytes = sim.payload_bytes;
  trainer.producer_ranks = paths.sim_ranks;
  trainer.ranks = paths.trainer_ranks;
}

workflow::ComponentSpec component_spec(const PlanPaths &paths, const std::string &role,
                                       const std::string &name, int ranks) {
  workflow::ComponentSpec spec;
  spec.name = name;
  spec.placement = workflow::Placement::local;
  spec.command = component_command(paths, role, name);
  spec.ranks = ranks;
  return spec;
}

void check_paths(const PlanPaths &paths) {
  if (paths.exe.empty() || paths.run_dir.empty() || paths.server_info.empty()) {
    throw Error(Errc::invalid_argument, "plan needs exe, run_dir and server_info");
  }
  if (paths.sim_ranks < 1 || paths.trainer_ranks < 1) {
    throw Error(Errc::invalid_argument, "rank counts must be >= 1");
  }
}

} // namespace

std::vector<std::string> component_command(const PlanPaths &paths, const std::string &role,
                                           const std::string &name) {
  return {paths.exe,
          role,
          "--config",
          paths.config_path(name).string(),
          "--server-info",
          paths.server_info.string(),
          "--rank",
          "{rank}",
          "--events-out",
          paths.events_path(name, "{rank}").string(),
          "--summary-out",
          paths.summary_path(name, "{rank}").string()};
}

PatternPlan build_pattern1(SimComponentConfig sim, TrainerComponentConfig trainer,
                           const PlanPaths &paths) {
  check_paths(paths);
  trainer.producers = {sim.name};
  trainer.blocking = false;
  link_trainer(trainer, sim, paths);
  sim.stop_key = trainer.steer ? stop_key(trainer.name) : std::string{};
  if (sim.scratch_dir.empty()) {
    sim.scratch_dir = (paths.run_dir / "scratch").string();
  }
  validate(sim);
  validate(trainer);
  if (sim.name == trainer.name) {
    throw Error(Errc::invalid_argument, "sim and trainer need distinct names");
  }

  PatternPlan plan;
  write_text_file(paths.config_path(sim.name), to_json(sim));
  write_text_file(paths.config_path(trainer.name), to_json(trainer));
  plan.graph.register_component(component_spec(paths, "sim", sim.name, paths.sim_ranks));
  plan.graph.register_component(
      component_spec(paths, "trainer", trainer.name, paths.trainer_ranks));
  plan.sims.push_back(std::move(sim));
  plan.trainer = std::move(trainer);
  return plan;
}

PatternPlan build_pattern2(int n_producers, SimComponentConfig sim, TrainerComponentConfig trainer,
                           const PlanPaths &paths) {
  check_paths(paths);
  if (n_producers < 1) {
    throw Error(Errc::invalid_argument, "pattern2 needs at least one producer");
  }
  if (sim.scratch_dir.empty()) {
    sim.scratch_dir = (paths.run_dir / "scratch").string();
  }
  trainer.blocking = true;
  trainer.producers.clear();
  link_trainer(trainer, sim, paths);

  PatternPlan plan;
  for (int i = 0; i < n_producers; ++i) {
    SimComponentConfig s = sim;
    s.name = sim.name + std::to_string(i);
    s.seed = sim.seed + 1000003ULL * static_cast<std::uint64_t>(i);
    s.stop_key = trainer.steer ? stop_key(trainer.name) : std::string{};
    validate(s);
    trainer.producers.push_back(s.name);
    plan.sims.push_back(std::move(s));
  }
  validate(trainer);
  for (const auto &s : plan.sims) {
    write_text_file(paths.config_path(s.name), to_json(s));
    plan.graph.register_component(component_spec(paths, "sim", s.name, paths.sim_ranks));
  }
  write_text_file(paths.config_path(trainer.name), to_json(trainer));
  plan.graph.register_component(
      component_spec(paths, "trainer", trainer.name, paths.trainer_ranks));
  plan.trainer = std::move(trainer);
  return plan;
}

} // namespace stagebench::components
