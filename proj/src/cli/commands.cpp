#include "stagebench/cli/commands.hpp"

#include "stagebench/cli/run_dir.hpp"
#include "stagebench/common/clock.hpp"
#include "stagebench/common/error.hpp"
#include "stagebench/components/patterns.hpp"
#include "stagebench/components/simulation.hpp"
#include "stagebench/components/snapshot.hpp"
#include "stagebench/components/trainer.hpp"
#include "stagebench/datastore/crc32.hpp"
#include "stagebench/datastore/datastore.hpp"
#include "stagebench/metrics/aggregate.hpp"
#include "stagebench/metrics/recorder.hpp"
#include "stagebench/metrics/timeline.hpp"
#include "stagebench/server/server_manager.hpp"
#include "stagebench/workflow/launcher.hpp"
#include "stagebench/workflow/workflow_file.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>

namespace stagebench::cli {

namespace fs = std::filesystem;
using components::read_text_file;
using components::write_text_file;
using datastore::BackendKind;

namespace {

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

// A backend started for one run, or an external one attached to.
struct RunBackend {
  std::unique_ptr<server::ServerManager> manager;
  datastore::ServerInfo info;
  std::vector<fs::path> owned_roots;

  void close() {
    if (datastore::is_directory_backend(info.kind)) {
      try {
        datastore::DataStoreClient(info, "orchestrator").clean_staged_data("");
      } catch (const Error &) {
        // Roots may already be gone; removal below still applies.
      }
      std::error_code ec;
      for (const auto &r : owned_roots) {
        fs::remove_all(r, ec);
      }
    }
    if (manager) {
      manager->stop_server();
    }
  }
};

fs::path nodelocal_root(const std::string &run_id) {
  const fs::path shm = "/dev/shm";
  std::error_code ec;
  const fs::path base = fs::is_directory(shm, ec) ? shm : fs::temp_directory_path();
  return base / ("stagebench-" + run_id);
}

RunBackend open_backend(const PatternOptions &o, const fs::path &run_dir,
                        const std::string &run_id) {
  RunBackend b;
  const fs::path info_path = run_dir / "server_info.json";
  if (!o.server_info.empty()) {
    b.info = datastore::load_server_info(o.server_info);
    datastore::save_server_info(b.info, info_path);
    // Fresh state per point: a persistent backend may hold a previous run's keys.
    datastore::DataStoreClient(b.info, "orchestrator").clean_staged_data("");
    return b;
  }
  server::ServerConfig cfg;
  cfg.kind = *datastore::parse_backend_kind(o.backend);
  cfg.info_path = info_path;
  if (cfg.kind == BackendKind::memserver) {
    cfg.bind.assign(static_cast<std::size_t>(o.endpoints), "127.0.0.1:0");
  } else {
    cfg.shard_count = o.shards;
    if (!o.roots.empty()) {
      cfg.roots = o.roots;
    } else {
      const fs::path root = cfg.kind == BackendKind::filesystem ? run_dir / "store"
                                                                : nodelocal_root(run_id);
      cfg.roots = {root.string()};
      b.owned_roots.push_back(root);
    }
  }
  b.manager = std::make_unique<server::ServerManager>(cfg);
  b.info = b.manager->start_server();
  if (!o.roots.empty()) {
    datastore::DataStoreClient(b.info, "orchestrator").clean_staged_data("");
  }
  return b;
}

components::SimComponentConfig sim_config(const PatternOptions &o, std::uint64_t payload) {
  components::SimComponentConfig sim;
  sim.name = "sim";
  kernels::KernelSpec k;
  k.name = "solver_step";
  k.kernel = kernels::KernelKind::MatMulSimple2D;
  k.run_time = o.sim_time;
  k.data_size = o.sim_kernel_size;
  k.busy = o.sim_busy;
  sim.kernels = {k};
  sim.steps = o.sim_steps;
  sim.write_interval = o.write_interval;
  sim.keys_per_snapshot = o.keys_per_snapshot;
  sim.payload_bytes = payload;
  sim.stop_check_interval = o.stop_check_interval;
  sim.seed = o.seed;
  return sim;
}

components::TrainerComponentConfig trainer_config(const PatternOptions &o) {
  components::TrainerComponentConfig t;
  t.name = "trainer";
  t.kernel = components::iteration_kernel(o.ai_time, o.ai_busy);
  t.total_iters = o.trainer_iters;
  t.read_interval = o.read_interval;
  t.steer = o.steer;
  t.poll_deadline = o.poll_deadline;
  t.seed = o.seed + 1;
  return t;
}

nlohmann::ordered_json options_json(const PatternOptions &o) {
  return {{"backend", o.backend},
          {"payload_bytes", o.payload_bytes},
          {"sim_steps", o.sim_steps},
          {"write_interval", o.write_interval},
          {"trainer_iters", o.trainer_iters},
          {"read_interval", o.read_interval},
          {"sim_time", o.sim_time},
          {"ai_time", o.ai_time},
          {"sim_busy", o.sim_busy},
          {"ai_busy", o.ai_busy},
          {"sim_kernel_size", o.sim_kernel_size},
          {"keys_per_snapshot", o.keys_per_snapshot},
          {"stop_check_interval", o.stop_check_interval},
          {"steer", o.steer},
          {"seed", o.seed},
          {"server_info", o.server_info},
          {"sim_ranks", o.sim_ranks},
          {"trainer_ranks", o.trainer_ranks},
          {"endpoints", o.endpoints},
          {"shards", o.shards},
          {"roots", o.roots},
          {"grace_period", o.grace_period},
          {"poll_deadline", o.poll_deadline},
          {"producers", o.producers},
          {"intervals", o.intervals},
          {"stall_producer", o.stall_producer},
          {"stall_snapshot", o.stall_snapshot},
          {"stall_seconds", o.stall_seconds}};
}

void print_problems(const fs::path &run_dir, const std::vector<std::string> &problems) {
  for (const auto &p : problems) {
    std::cerr << "schema check (" << run_dir.string() << "): " << p << "\n";
  }
}

void write_launch_report(const fs::path &run_dir, const workflow::LaunchReport &report) {
  write_text_file(run_dir / "launch_report.json", workflow::to_json(report));
}

int run_pattern_once(const PatternOptions &o, bool pattern2, std::uint64_t payload,
                     std::string run_id) {
  const std::string pattern = pattern2 ? "pattern2" : "pattern1";
  if (run_id.empty()) {
    run_id = new_run_id(pattern);
  }
  const fs::path run_dir = fs::absolute(output_root(o.out) / run_id);
  if (fs::exists(run_dir)) {
    throw Error(Errc::invalid_argument, "run directory already exists: " + run_dir.string());
  }
  prepare_run_dir(run_dir);

  RunBackend backend = open_backend(o, run_dir, run_id);
  workflow::LaunchReport report;
  try {
    components::PlanPaths paths;
    paths.exe = self_exe();
    paths.run_dir = run_dir;
    paths.server_info = run_dir / "server_info.json";
    paths.sim_ranks = o.sim_ranks;
    paths.trainer_ranks = o.trainer_ranks;

    auto sim = sim_config(o, payload);
    auto trainer = trainer_config(o);
    components::PatternPlan plan;
    if (pattern2) {
      sim.steps = o.intervals * o.write_interval;
      trainer.total_iters = o.intervals * o.read_interval;
      plan = components::build_pattern2(o.producers, sim, trainer, paths);
      if (o.stall_producer >= 0) {
        if (o.stall_producer >= o.producers) {
          throw Error(Errc::invalid_argument, "stall producer index out of range");
        }
        auto &s = plan.sims.at(static_cast<std::size_t>(o.stall_producer));
        s.stall_at_snapshot = o.stall_snapshot;
        s.stall_seconds = o.stall_seconds;
        write_text_file(paths.config_path(s.name), components::to_json(s));
      }
    } else {
      plan = components::build_pattern1(sim, trainer, paths);
    }

    RunManifest m;
    m.run_id = run_id;
    m.pattern = pattern;
    m.backend = std::string(datastore::to_string(backend.info.kind));
    m.payload_bytes = payload;
    m.producers = pattern2 ? o.producers : 1;
    m.seed = o.seed;
    m.output_dir = run_dir.string();
    m.config["options"] = options_json(o);
    m.config["server_info"] = nlohmann::ordered_json::parse(datastore::to_json(backend.info));
    auto comps = nlohmann::ordered_json::object();
    for (const auto &s : plan.sims) {
      comps[s.name] = nlohmann::ordered_json::parse(components::to_json(s));
    }
    comps[plan.trainer.name] = nlohmann::ordered_json::parse(components::to_json(plan.trainer));
    m.config["components"] = std::move(comps);
    write_text_file(run_dir / "manifest.json", to_json(m));

    workflow::LauncherConfig lc;
    lc.log_dir = run_dir / "logs";
    lc.grace_period = o.grace_period;
    lc.epoch_ns = monotonic_ns();
    datastore::DataStoreClient(backend.info, "orchestrator")
        .stage_write(components::epoch_key, std::to_string(lc.epoch_ns));
    report = workflow::launch(plan.graph, lc);
    write_launch_report(run_dir, report);

    ReportRequest req;
    req.backend = m.backend;
    req.title = run_id;
    if (pattern2) {
      req.trainer = plan.trainer.name;
      req.trainer_iters = static_cast<std::size_t>(plan.trainer.total_iters);
    }
    try {
      write_reports(run_dir, req);
    } catch (const Error &e) {
      if (report.success) {
        throw;
      }
      std::cerr << "report: " << e.what() << "\n";
    }
  } catch (...) {
    backend.close();
    throw;
  }
  backend.close();

  const auto problems = check_run_dir(run_dir);
  print_problems(run_dir, problems);
  std::cout << run_dir.string() << std::endl;
  if (!report.success) {
    std::cerr << "run failed: " << report.error << " (logs in " << (run_dir / "logs").string()
              << ")\n";
    return exit_failure;
  }
  return problems.empty() ? exit_ok : exit_failure;
}

int run_pattern(const PatternOptions &o, bool pattern2) {
  if (!o.server_info.empty() && !fs::exists(o.server_info)) {
    throw Error(Errc::not_initialized, "server info not found: " + o.server_info);
  }
  int rc = exit_ok;
  for (const auto payload : o.payload_bytes) {
    std::string id = o.run_id;
    if (!id.empty() && o.payload_bytes.size() > 1) {
      id += "-" + std::to_string(payload);
    }
    rc = std::max(rc, run_pattern_once(o, pattern2, payload, id));
  }
  return rc;
}

template <typename Summary, typename Config, typename RunFn, typename ToJson>
int run_component(const ComponentOptions &o, Config (*parse)(std::string_view), RunFn run,
                  ToJson to_json_fn) {
  const int rank = resolve_rank(o.rank);
  const auto r = std::to_string(rank);
  const auto cfg = parse(read_text_file(o.config));
  const auto info = datastore::load_server_info(o.server_info);
  datastore::DataStoreClient store(info, cfg.name + ".r" + r);

  std::int64_t epoch = 0;
  if (const auto v = store.stage_read(components::epoch_key)) {
    const auto text = as_chars(*v);
    std::from_chars(text.data(), text.data() + text.size(), epoch);
  }
  if (epoch == 0) {
    epoch = monotonic_ns();
  }
  const std::string events = o.events_out.empty()
                                 ? cfg.name + ".r" + r + ".jsonl"
                                 : replace_all(o.events_out, "{rank}", r);
  metrics::Recorder recorder(events, epoch);
  const Summary summary = run(cfg, store, recorder, rank);
  recorder.close();
  if (!o.summary_out.empty()) {
    write_text_file(replace_all(o.summary_out, "{rank}", r), to_json_fn(summary));
  }
  return exit_ok;
}

std::string run_id_of(const fs::path &file, const fs::path &events_dir) {
  const auto rel = file.lexically_relative(events_dir);
  std::vector<std::string> parts;
  for (const auto &p : rel.parent_path()) {
    parts.push_back(p.string());
  }
  for (std::size_t i = parts.size(); i-- > 0;) {
    if (parts[i] == "events" && i > 0) {
      return parts[i - 1];
    }
  }
  auto base = fs::weakly_canonical(events_dir);
  if (base.filename() == "events" && base.has_parent_path()) {
    base = base.parent_path();
  }
  return base.filename().string();
}

} // namespace

void apply_paper_scale(PatternOptions &o) {
  o.sim_time = 0.03147;
  o.ai_time = 0.061;
  o.trainer_iters = 5000;
  o.sim_steps = 10507;
  o.sim_kernel_size = {256, 256};
}

void apply_config_file(PatternOptions &o, const fs::path &path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::invalid_argument, path.string() + ": " + e.what());
  }
  if (!j.is_object()) {
    throw Error(Errc::invalid_argument, path.string() + ": expected a JSON object");
  }
  try {
    for (const auto &[raw, v] : j.items()) {
      const std::string key = replace_all(raw, "-", "_");
      if (key == "backend") {
        o.backend = v.get<std::string>();
      } else if (key == "payload_bytes") {
        o.payload_bytes = v.is_array() ? v.get<std::vector<std::uint64_t>>()
                                       : std::vector<std::uint64_t>{v.get<std::uint64_t>()};
      } else if (key == "sim_steps") {
        o.sim_steps = v.get<std::int64_t>();
      } else if (key == "write_interval") {
        o.write_interval = v.get<std::int64_t>();
      } else if (key == "trainer_iters") {
        o.trainer_iters = v.get<std::int64_t>();
      } else if (key == "read_interval") {
        o.read_interval = v.get<std::int64_t>();
      } else if (key == "sim_time") {
        o.sim_time = v.get<double>();
      } else if (key == "ai_time") {
        o.ai_time = v.get<double>();
      } else if (key == "sim_busy") {
        o.sim_busy = v.get<bool>();
      } else if (key == "ai_busy") {
        o.ai_busy = v.get<bool>();
      } else if (key == "sim_kernel_size") {
        o.sim_kernel_size = v.get<std::vector<std::size_t>>();
      } else if (key == "keys_per_snapshot") {
        o.keys_per_snapshot = v.get<int>();
      } else if (key == "stop_check_interval") {
        o.stop_check_interval = v.get<std::int64_t>();
      } else if (key == "steer") {
        o.steer = v.get<bool>();
      } else if (key == "seed") {
        o.seed = v.get<std::uint64_t>();
      } else if (key == "out") {
        o.out = v.get<std::string>();
      } else if (key == "server_info") {
        o.server_info = v.get<std::string>();
      } else if (key == "run_id") {
        o.run_id = v.get<std::string>();
      } else if (key == "sim_ranks") {
        o.sim_ranks = v.get<int>();
      } else if (key == "trainer_ranks") {
        o.trainer_ranks = v.get<int>();
      } else if (key == "endpoints") {
        o.endpoints = v.get<int>();
      } else if (key == "shards") {
        o.shards = v.get<std::size_t>();
      } else if (key == "roots" || key == "root") {
        o.roots = v.is_array() ? v.get<std::vector<std::string>>()
                               : std::vector<std::string>{v.get<std::string>()};
      } else if (key == "grace_period") {
        o.grace_period = v.get<double>();
      } else if (key == "poll_deadline") {
        o.poll_deadline = v.get<double>();
      } else if (key == "producers") {
        o.producers = v.get<int>();
      } else if (key == "intervals") {
        o.intervals = v.get<std::int64_t>();
      } else if (key == "stall_producer") {
        o.stall_producer = v.get<int>();
      } else if (key == "stall_snapshot") {
        o.stall_snapshot = v.get<std::int64_t>();
      } else if (key == "stall_seconds") {
        o.stall_seconds = v.get<double>();
      } else {
        throw Error(Errc::invalid_argument, path.string() + ": unknown option '" + raw + "'");
      }
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::invalid_argument, path.string() + ": " + e.what());
  }
}

int cmd_pattern1(const PatternOptions &opts) { return run_pattern(opts, false); }
int cmd_pattern2(const PatternOptions &opts) { return run_pattern(opts, true); }

int cmd_report(const ReportOptions &o) {
  if (!fs::is_directory(o.events_dir)) {
    std::cerr << "error: events dir not found: " << o.events_dir.string() << "\n";
    return exit_failure;
  }
  const auto files = metrics::find_event_files(o.events_dir);
  const auto log = metrics::load_events(files);
  auto stats = metrics::summarize(log.events, o.warmup_skip);
  stats.malformed_lines = log.malformed_lines;
  stats.partial_lines = log.partial_lines;
  if (log.malformed_lines + log.partial_lines > 0) {
    std::cerr << "warning: " << log.malformed_lines << " malformed and " << log.partial_lines
              << " partial line(s) skipped\n";
  }

  if (o.table == "summary") {
    std::cout << (o.format == "json" ? metrics::to_json(stats) : metrics::to_csv(stats));
  } else {
    const auto points = metrics::throughput_table(log.events, o.backend);
    if (o.format == "json") {
      nlohmann::ordered_json j;
      j["units"] = "GiB/s (2^30 bytes)";
      auto rows = nlohmann::ordered_json::array();
      for (const auto &p : points) {
        rows.push_back({{"backend", p.backend},
                        {"payload_bytes", p.payload_bytes},
                        {"direction", p.direction},
                        {"mean_gibps", p.mean_gibps},
                        {"std_gibps", p.std_gibps},
                        {"n", p.n}});
      }
      j["points"] = std::move(rows);
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << metrics::to_csv(points);
    }
  }

  if (o.timeline) {
    std::map<std::string, std::vector<fs::path>> runs;
    for (const auto &f : files) {
      runs[run_id_of(f, o.events_dir)].push_back(f);
    }
    const fs::path out_dir = o.out_dir.empty() ? o.events_dir : o.out_dir;
    for (const auto &[run_id, run_files] : runs) {
      const auto tl = metrics::build_timeline(metrics::load_events(run_files).events);
      write_text_file(out_dir / (run_id + ".timeline.svg"), metrics::to_svg(tl, run_id));
      write_text_file(out_dir / (run_id + ".timeline.json"), metrics::to_json(tl));
      std::cerr << "timeline: " << (out_dir / (run_id + ".timeline.svg")).string() << "\n";
    }
  }
  return exit_ok;
}

int cmd_server_start(const ServerStartOptions &o) {
  server::ServerConfig cfg;
  if (!o.config.empty()) {
    cfg = server::load_server_config(o.config);
  } else {
    cfg.kind = *datastore::parse_backend_kind(o.backend);
    if (cfg.kind == BackendKind::memserver) {
      cfg.bind = o.bind.empty() ? std::vector<std::string>{"127.0.0.1:0"} : o.bind;
    } else {
      cfg.roots = o.roots;
      cfg.shard_count = o.shards;
    }
  }
  if (cfg.info_path.empty()) {
    cfg.info_path = o.info;
  }
  server::ServerManager manager(cfg);
  const auto &info = manager.start_server();
  std::cout << datastore::to_json(info) << std::flush;
  if (info.kind == BackendKind::memserver) {
    manager.wait_for_shutdown();
    manager.stop_server();
  }
  return exit_ok;
}

int cmd_server_stop(const fs::path &info_path) {
  const auto info = datastore::load_server_info(info_path);
  if (info.kind != BackendKind::memserver) {
    return exit_ok;
  }
  const auto acked = server::send_shutdown(info);
  std::cout << acked << "/" << info.endpoints.size() << " endpoint(s) acknowledged shutdown\n";
  return acked == info.endpoints.size() ? exit_ok : exit_failure;
}

int cmd_sim(const ComponentOptions &o) {
  return run_component<components::SimSummary>(
      o, &components::sim_config_from_json,
      [](const auto &c, auto &s, auto &r, int rank) {
        return components::run_simulation(c, s, r, rank);
      },
      [](const components::SimSummary &s) { return components::to_json(s); });
}

int cmd_trainer(const ComponentOptions &o) {
  return run_component<components::TrainerSummary>(
      o, &components::trainer_config_from_json,
      [](const auto &c, auto &s, auto &r, int rank) {
        return components::run_trainer(c, s, r, rank);
      },
      [](const components::TrainerSummary &s) { return components::to_json(s); });
}

int cmd_run(const RunOptions &o) {
  auto wf = workflow::load_workflow(o.workflow);
  const std::string run_id = o.run_id.empty() ? new_run_id("custom") : o.run_id;
  const fs::path run_dir = fs::absolute(output_root(o.out) / run_id);
  if (fs::exists(run_dir)) {
    throw Error(Errc::invalid_argument, "run directory already exists: " + run_dir.string());
  }
  prepare_run_dir(run_dir);

  workflow::WorkflowGraph graph;
  for (auto [name, spec] : wf.graph.components()) {
    for (auto &tok : spec.command) {
      tok = replace_all(tok, "{run_dir}", run_dir.string());
    }
    graph.register_component(std::move(spec));
  }
  graph.validate();

  RunManifest m;
  m.run_id = run_id;
  m.pattern = "custom";
  m.backend = "none";
  m.output_dir = run_dir.string();
  m.config["workflow"] = nlohmann::ordered_json::parse(read_text_file(o.workflow));
  write_text_file(run_dir / "manifest.json", to_json(m));

  wf.launcher.log_dir = run_dir / "logs";
  wf.launcher.epoch_ns = monotonic_ns();
  const auto report = workflow::launch(graph, wf.launcher);
  write_launch_report(run_dir, report);
  if (!metrics::find_event_files(run_dir / "events").empty()) {
    ReportRequest req;
    req.backend = "unknown";
    req.title = run_id;
    write_reports(run_dir, req);
  }
  const auto problems = check_run_dir(run_dir);
  print_problems(run_dir, problems);
  std::cout << run_dir.string() << std::endl;
  if (!report.success) {
    std::cerr << "run failed: " << report.error << "\n";
    return exit_failure;
  }
  return problems.empty() ? exit_ok : exit_failure;
}

int cmd_crc32(const std::string &key) {
  std::cout << fmt::format("{:08X}", datastore::crc32(std::string_view(key))) << "\n";
  return exit_ok;
}

int resolve_rank(const std::string &spec) {
  std::string text = spec;
  if (spec == "{rank}" || spec == "auto") {
    text.clear();
    for (const char *var : {"OMPI_COMM_WORLD_RANK", "PMI_RANK", "PALS_RANKID"}) {
      if (const char *v = std::getenv(var); v != nullptr && *v != '\0') {
        text = v;
        break;
      }
    }
    if (text.empty()) {
      return 0;
    }
  }
  int rank = -1;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), rank);
  if (ec != std::errc{} || ptr != text.data() + text.size() || rank < 0) {
    throw Error(Errc::invalid_argument, "bad rank '" + spec + "'");
  }
  return rank;
}

std::string self_exe() {
  if (const char *env = std::getenv("STAGEBENCH_EXE"); env != nullptr && *env != '\0') {
    return env;
  }
  return fs::read_symlink("/proc/self/exe").string();
}

} // namespace stagebench::cli
