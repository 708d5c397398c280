#include "stagebench/workflow/launcher.hpp"

#include "stagebench/common/clock.hpp"
#include "stagebench/common/error.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include <algorithm>
#include <cstring>
#include <map>
#include <sstream>
#include <thread>

extern char **environ;

namespace stagebench::workflow {

namespace {

std::vector<std::string> split_ws(const std::string &s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) {
    out.push_back(tok);
  }
  return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

struct Process {
  std::string component;
  int rank = 0;
  pid_t pid = -1;
  bool running = false;
  int exit_code = 0;
  std::int64_t end_ns = 0;
};

int decode_status(int status) {
  if (WIFEXITED(status)) {
    return WEXITSTATUS(status);
  }
  if (WIFSIGNALED(status)) {
    return 128 + WTERMSIG(status);
  }
  return 1;
}

std::vector<std::string> build_env(const std::map<std::string, std::string> &overrides) {
  std::vector<std::string> env;
  for (char **e = environ; *e != nullptr; ++e) {
    std::string_view kv(*e);
    const auto eq = kv.find('=');
    const std::string name(kv.substr(0, eq));
    if (!overrides.contains(name)) {
      env.emplace_back(kv);
    }
  }
  for (const auto &[k, v] : overrides) {
    env.push_back(k + "=" + v);
  }
  return env;
}

std::vector<char *> c_strings(std::vector<std::string> &v) {
  std::vector<char *> out;
  out.reserve(v.size() + 1);
  for (auto &s : v) {
    out.push_back(s.data());
  }
  out.push_back(nullptr);
  return out;
}

// posix_spawn with the child leading its own process group, so teardown can
// signal whatever a launcher forks underneath it.
pid_t spawn(std::vector<std::string> argv, std::vector<std::string> env,
            const std::filesystem::path &log_path) {
  if (argv.empty()) {
    throw Error(Errc::invalid_argument, "empty command");
  }
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGMASK |
                                      POSIX_SPAWN_SETSIGDEF);
  posix_spawnattr_setpgroup(&attr, 0);
  sigset_t none;
  sigemptyset(&none);
  posix_spawnattr_setsigmask(&attr, &none);
  sigset_t defaults;
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGPIPE);
  sigaddset(&defaults, SIGTERM);
  sigaddset(&defaults, SIGINT);
  posix_spawnattr_setsigdefault(&attr, &defaults);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  if (!log_path.empty()) {
    posix_spawn_file_actions_addopen(&actions, 1, log_path.c_str(),
                                     O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_adddup2(&actions, 1, 2);
  }

  auto cargv = c_strings(argv);
  auto cenv = c_strings(env);
  pid_t pid = -1;
  const int rc = posix_spawnp(&pid, cargv[0], &actions, &attr, cargv.data(), cenv.data());
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) {
    throw Error(Errc::startup, "spawn '" + argv[0] + "': " + std::strerror(rc));
  }
  return pid;
}

class Supervisor {
public:
  explicit Supervisor(std::int64_t epoch_ns) : epoch_ns_(epoch_ns) {}

  double rel(std::int64_t ns) const { return static_cast<double>(ns - epoch_ns_) * 1e-9; }

  void add(Process p) { procs_.push_back(std::move(p)); }

  bool any_running() const {
    return std::any_of(procs_.begin(), procs_.end(), [](const auto &p) { return p.running; });
  }

  // Reaps whatever has exited; returns true if any process exited nonzero.
  bool reap() {
    bool failed = false;
    for (auto &p : procs_) {
      if (!p.running) {
        continue;
      }
      int status = 0;
      const pid_t r = ::waitpid(p.pid, &status, WNOHANG);
      if (r == p.pid) {
        p.running = false;
        p.end_ns = monotonic_ns();
        p.exit_code = decode_status(status);
        failed = failed || p.exit_code != 0;
      } else if (r < 0 && errno == ECHILD) {
        p.running = false;
        p.end_ns = monotonic_ns();
        p.exit_code = 1;
        failed = true;
      }
    }
    return failed;
  }

  void signal_all(int sig) {
    for (const auto &p : procs_) {
      if (p.running) {
        ::kill(-p.pid, sig);
      }
    }
  }

  void terminate(double grace) {
    signal_all(SIGTERM);
    const auto deadline = monotonic_ns() + static_cast<std::int64_t>(grace * 1e9);
    while (any_running() && monotonic_ns() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
      reap();
    }
    if (any_running()) {
      signal_all(SIGKILL);
      for (auto &p : procs_) {
        if (p.running) {
          int status = 0;
          ::waitpid(p.pid, &status, 0);
          p.running = false;
          p.end_ns = monotonic_ns();
          p.exit_code = decode_status(status);
        }
      }
    }
  }

  const std::vector<Process> &processes() const { return procs_; }

private:
  std::int64_t epoch_ns_;
  std::vector<Process> procs_;
};

} // namespace

const ComponentResult &LaunchReport::at(const std::string &name) const {
  for (const auto &c : components) {
    if (c.name == name) {
      return c;
    }
  }
  throw Error(Errc::invalid_argument, "no component '" + name + "' in report");
}

std::string to_json(const LaunchReport &report) {
  nlohmann::ordered_json j;
  j["success"] = report.success;
  j["makespan"] = report.makespan;
  if (!report.error.empty()) {
    j["error"] = report.error;
  }
  auto comps = nlohmann::ordered_json::array();
  for (const auto &c : report.components) {
    comps.push_back({{"name", c.name},
                     {"launched", c.launched},
                     {"start_time", c.start_time},
                     {"end_time", c.end_time},
                     {"exit_code", c.exit_code}});
  }
  j["components"] = std::move(comps);
  return j.dump(2) + "\n";
}

std::vector<std::vector<std::string>> expand_commands(const ComponentSpec &spec,
                                                      const LauncherConfig &cfg) {
  std::vector<std::vector<std::string>> out;
  const std::string ranks = std::to_string(spec.ranks);
  if (spec.placement == Placement::local) {
    for (int r = 0; r < spec.ranks; ++r) {
      std::vector<std::string> argv;
      for (const auto &tok : spec.command) {
        argv.push_back(replace_all(replace_all(tok, "{rank}", std::to_string(r)), "{ranks}", ranks));
      }
      out.push_back(std::move(argv));
    }
    return out;
  }
  std::vector<std::string> argv;
  for (const auto &tok : split_ws(cfg.remote_template)) {
    if (tok == "{command}") {
      for (const auto &c : spec.command) {
        argv.push_back(replace_all(c, "{ranks}", ranks));
      }
    } else if (tok == "{launcher}") {
      for (const auto &l : split_ws(cfg.launcher)) {
        argv.push_back(l);
      }
    } else {
      argv.push_back(replace_all(replace_all(tok, "{ranks}", ranks), "{name}", spec.name));
    }
  }
  out.push_back(std::move(argv));
  return out;
}

LaunchReport launch(const WorkflowGraph &graph, const LauncherConfig &cfg) {
  const auto stages = graph.validate();
  if (!cfg.log_dir.empty()) {
    std::filesystem::create_directories(cfg.log_dir);
  }

  LaunchReport report;
  report.epoch_ns = cfg.epoch_ns != 0 ? cfg.epoch_ns : monotonic_ns();
  Supervisor sup(report.epoch_ns);
  std::map<std::string, ComponentResult> results;
  for (const auto &[name, spec] : graph.components()) {
    results[name].name = name;
  }

  bool failed = false;
  for (const auto &stage : stages) {
    if (failed) {
      break;
    }
    for (const auto &name : stage) {
      const auto &spec = graph.at(name);
      const auto commands = expand_commands(spec, cfg);
      auto &res = results[name];
      res.launched = true;
      res.exit_code = 0;
      res.start_time = sup.rel(monotonic_ns());
      for (std::size_t r = 0; r < commands.size(); ++r) {
        std::filesystem::path log;
        if (!cfg.log_dir.empty()) {
          log = cfg.log_dir / (name + ".r" + std::to_string(r) + ".log");
        }
        try {
          const pid_t pid = spawn(commands[r], build_env(spec.env), log);
          sup.add(Process{name, static_cast<int>(r), pid, true, 0, 0});
        } catch (const Error &e) {
          report.error = e.what();
          res.exit_code = 127;
          res.end_time = res.start_time;
          failed = true;
          break;
        }
      }
      if (failed) {
        break;
      }
    }

    while (!failed && sup.any_running()) {
      if (sup.reap()) {
        failed = true;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    if (failed) {
      sup.terminate(cfg.grace_period);
    }
    for (const auto &p : sup.processes()) {
      auto &res = results[p.component];
      if (p.end_ns != 0) {
        res.end_time = std::max(res.end_time, sup.rel(p.end_ns));
      }
      // First nonzero code of any rank wins.
      if (res.exit_code == 0 && p.exit_code != 0) {
        res.exit_code = p.exit_code;
      }
    }
  }
  if (failed && report.error.empty()) {
    for (const auto &[name, res] : results) {
      if (res.launched && res.exit_code != 0) {
        report.error = "component '" + name + "' exited with " + std::to_string(res.exit_code);
        break;
      }
    }
  }

  report.makespan = sup.rel(monotonic_ns());
  bool all_zero = true;
  for (auto &[name, res] : results) {
    all_zero = all_zero && res.launched && res.exit_code == 0;
    report.components.push_back(res);
  }
  report.success = all_zero;
  return report;
}

} // namespace stagebench::workflow
