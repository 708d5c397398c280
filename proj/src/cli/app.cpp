#include "stagebench/cli/app.hpp"

#include "stagebench/cli/commands.hpp"
#include "stagebench/common/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace stagebench::cli {

namespace {

const std::vector<std::string> backend_names = {"filesystem", "nodelocal", "memserver"};

struct PatternFlags {
  PatternOptions opts;
  std::string config;
  bool paper_scale = false;
  bool no_steer = false;
};

void add_pattern_options(CLI::App *cmd, PatternFlags &f, bool pattern2) {
  auto &o = f.opts;
  cmd->add_option("--backend", o.backend, "Staging backend")
      ->check(CLI::IsMember(backend_names))
      ->capture_default_str();
  cmd->add_option("--payload-bytes", o.payload_bytes,
                  "Bytes per staged key; a comma-separated list runs a sweep")
      ->delimiter(',')
      ->check(CLI::Range(std::uint64_t{8}, std::uint64_t{0x7FFFFFFF}))
      ->capture_default_str();
  cmd->add_option("--seed", o.seed)->capture_default_str();
  cmd->add_option("--out", o.out, "Output root (default $STAGEBENCH_OUT or ./stagebench-runs)");
  cmd->add_option("--server-info", o.server_info, "Use a running backend");
  cmd->add_option("--run-id", o.run_id, "Run directory name (default generated)");
  cmd->add_option("--config", f.config, "JSON file overriding flags");
  cmd->add_option("--write-interval", o.write_interval)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--read-interval", o.read_interval)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--sim-time", o.sim_time, "Seconds per simulation iteration")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--ai-time", o.ai_time, "Seconds per training iteration")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--sim-busy", o.sim_busy, "Compute (true) or sleep (false) in sim kernels")
      ->capture_default_str();
  cmd->add_option("--ai-busy", o.ai_busy, "Compute (true) or sleep (false) in training")
      ->capture_default_str();
  cmd->add_option("--sim-kernel-size", o.sim_kernel_size, "Matrix dims of the sim kernel")
      ->delimiter(',')
      ->expected(2)
      ->capture_default_str();
  cmd->add_option("--keys-per-snapshot", o.keys_per_snapshot)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--stop-check-interval", o.stop_check_interval)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--no-steer", f.no_steer, "Trainer does not stage the stop key");
  cmd->add_flag("--paper-scale", f.paper_scale, "Full-scale iteration times, counts and kernel size");
  cmd->add_option("--sim-ranks", o.sim_ranks)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--trainer-ranks", o.trainer_ranks)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--endpoints", o.endpoints, "Memserver endpoints to start")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--shards", o.shards, "Shards for directory backends")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--root", o.roots, "Directory backend root (repeatable)");
  cmd->add_option("--grace-period", o.grace_period)->capture_default_str();
  cmd->add_option("--poll-deadline", o.poll_deadline)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  if (pattern2) {
    cmd->add_option("--producers", o.producers)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--intervals", o.intervals, "Trainer updates")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--stall-producer", o.stall_producer, "Producer index to delay");
    cmd->add_option("--stall-snapshot", o.stall_snapshot, "Snapshot (1-based) to delay");
    cmd->add_option("--stall-seconds", o.stall_seconds)->check(CLI::NonNegativeNumber);
  } else {
    cmd->add_option("--sim-steps", o.sim_steps)->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--trainer-iters", o.trainer_iters)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
}

// Precedence: defaults < --paper-scale < explicit flags < --config file.
PatternOptions resolve(CLI::App *cmd, PatternFlags &f) {
  PatternOptions o = f.opts;
  if (f.paper_scale) {
    PatternOptions paper = o;
    apply_paper_scale(paper);
    auto unset = [&](const char *flag) {
      const auto *opt = cmd->get_option_no_throw(flag);
      return opt == nullptr || opt->count() == 0;
    };
    if (unset("--sim-time")) {
      o.sim_time = paper.sim_time;
    }
    if (unset("--ai-time")) {
      o.ai_time = paper.ai_time;
    }
    if (unset("--trainer-iters")) {
      o.trainer_iters = paper.trainer_iters;
    }
    if (unset("--sim-steps")) {
      o.sim_steps = paper.sim_steps;
    }
    if (unset("--sim-kernel-size")) {
      o.sim_kernel_size = paper.sim_kernel_size;
    }
  }
  o.steer = !f.no_steer;
  if (!f.config.empty()) {
    apply_config_file(o, f.config);
  }
  return o;
}

} // namespace

int run(int argc, char **argv) {
  CLI::App app{"stagebench: in-transit data staging benchmark for coupled simulation and "
               "training workflows"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "stagebench 0.1.0");
  int rc = exit_ok;

  // server
  auto *server = app.add_subcommand("server", "Start or stop a staging backend");
  server->require_subcommand(1);
  ServerStartOptions start_opts;
  auto *start = server->add_subcommand("start", "Start a backend and publish its server info");
  start->add_option("--config", start_opts.config, "Server config JSON");
  start->add_option("--backend", start_opts.backend)
      ->check(CLI::IsMember(backend_names))
      ->capture_default_str();
  start->add_option("--bind", start_opts.bind, "host:port per memserver endpoint (repeatable)");
  start->add_option("--root", start_opts.roots, "Directory backend root (repeatable)");
  start->add_option("--shards", start_opts.shards)->check(CLI::PositiveNumber)->capture_default_str();
  start->add_option("--info", start_opts.info, "Where to write the server info JSON");
  start->callback([&] { rc = cmd_server_start(start_opts); });
  std::string stop_info;
  auto *stop = server->add_subcommand("stop", "Send SHUTDOWN to every memserver endpoint");
  stop->add_option("--info", stop_info, "Server info JSON")->required();
  stop->callback([&] { rc = cmd_server_stop(stop_info); });

  // patterns
  PatternFlags p1;
  auto *pattern1 = app.add_subcommand("pattern1", "One simulation and one asynchronous trainer");
  add_pattern_options(pattern1, p1, false);
  pattern1->callback([&] { rc = cmd_pattern1(resolve(pattern1, p1)); });

  PatternFlags p2;
  p2.opts.write_interval = 10;
  p2.opts.read_interval = 10;
  p2.opts.keys_per_snapshot = 1;
  p2.opts.payload_bytes = {419430};
  auto *pattern2 = app.add_subcommand("pattern2", "N simulations feeding one blocking trainer");
  add_pattern_options(pattern2, p2, true);
  pattern2->callback([&] { rc = cmd_pattern2(resolve(pattern2, p2)); });

  // report
  ReportOptions report_opts;
  auto *report = app.add_subcommand("report", "Aggregate event logs");
  report->add_option("--events-dir", report_opts.events_dir, "Directory searched for *.jsonl")
      ->required();
  report->add_option("--format", report_opts.format)
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  report->add_option("--table", report_opts.table)
      ->check(CLI::IsMember({"summary", "throughput"}))
      ->capture_default_str();
  report->add_flag("--timeline", report_opts.timeline, "Write one SVG timeline per run id");
  report->add_option("--out-dir", report_opts.out_dir, "Timeline output directory");
  report->add_option("--backend", report_opts.backend, "Backend label for throughput rows")
      ->capture_default_str();
  report->add_option("--warmup", report_opts.warmup_skip,
                     "Events dropped per (component, rank, kind) stream")
      ->capture_default_str();
  report->callback([&] { rc = cmd_report(report_opts); });

  // selftest
  SelftestOptions st;
  auto *selftest = app.add_subcommand("selftest", "Run built-in health checks");
  selftest->add_option("--root", st.root, "Filesystem root for the smoke run");
  selftest->add_option("--smoke-seconds", st.smoke_seconds)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  selftest->callback([&] { rc = cmd_selftest(st); });

  // crc32
  std::string crc_key;
  auto *crc = app.add_subcommand("crc32", "Print the CRC-32 of a key as 8 hex digits");
  crc->add_option("key", crc_key)->required();
  crc->callback([&] { rc = cmd_crc32(crc_key); });

  // run
  RunOptions run_opts;
  auto *runc = app.add_subcommand("run", "Launch a workflow description file");
  runc->add_option("--workflow", run_opts.workflow)->required()->check(CLI::ExistingFile);
  runc->add_option("--out", run_opts.out);
  runc->add_option("--run-id", run_opts.run_id);
  runc->callback([&] { rc = cmd_run(run_opts); });

  // component processes
  ComponentOptions comp;
  for (const char *role : {"sim", "trainer"}) {
    auto *c = app.add_subcommand(role, std::string("Run one ") + role + " component process");
    c->add_option("--config", comp.config)->required();
    c->add_option("--server-info", comp.server_info)->required();
    c->add_option("--rank", comp.rank, "Rank, or {rank}/auto to read the MPI environment")
        ->capture_default_str();
    c->add_option("--events-out", comp.events_out)->required();
    c->add_option("--summary-out", comp.summary_out);
    const std::string r = role;
    c->callback([&, r] { rc = r == "sim" ? cmd_sim(comp) : cmd_trainer(comp); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App *target = &app;
    for (auto *sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().back();
         sub != nullptr;
         sub = sub->get_subcommands().empty() ? nullptr : sub->get_subcommands().back()) {
      target = sub;
    }
    std::cerr << target->help();
    return exit_usage;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::invalid_argument ? exit_usage : exit_failure;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failure;
  }
  return rc;
}

} // namespace stagebench::cli
