#include "stagebench/workflow/graph.hpp"
#include "stagebench/common/error.hpp"
#include "stagebench/workflow/launcher.hpp"
#include "stagebench/workflow/workflow_file.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <csignal>
#include <fstream>
#include <map>
#include <thread>
#include <random>

namespace wf = stagebench::workflow;
namespace fs = std::filesystem;
using stagebench::Errc;
using stagebench::Error;
using stagebench::test::TempDir;

namespace {

wf::ComponentSpec sh(std::string name, std::string script, std::vector<std::string> deps = {},
                     int ranks = 1) {
  wf::ComponentSpec s;
  s.name = std::move(name);
  s.command = {"/bin/sh", "-c", std::move(script)};
  s.dependencies = std::move(deps);
  s.ranks = ranks;
  return s;
}

std::string validation_message(const wf::WorkflowGraph &g) {
  try {
    g.validate();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::validation);
    return e.what();
  }
  ADD_FAILURE() << "graph validated";
  return {};
}

// Killed grandchildren linger as zombies until init reaps them.
bool group_alive(pid_t pgid) {
  for (int i = 0; i < 200; ++i) {
    if (::kill(-pgid, 0) != 0) {
      return false;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return true;
}

} // namespace

TEST(Graph, RegisterAndEdges) {
  wf::WorkflowGraph g;
  g.register_component(sh("A", "true"));
  g.register_component(sh("B", "true", {"A"}));
  EXPECT_EQ(g.size(), 2u);
  const auto edges = g.edges();
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0], (std::pair<std::string, std::string>{"A", "B"}));
  EXPECT_THROW(g.register_component(sh("A", "true")), Error);
}

TEST(Graph, DeferredValidationOfUnknownDeps) {
  wf::WorkflowGraph g;
  EXPECT_NO_THROW(g.register_component(sh("B", "true", {"A", "Z"})));
  const auto msg = validation_message(g);
  EXPECT_NE(msg.find("A"), std::string::npos);
  EXPECT_NE(msg.find("Z"), std::string::npos);
  g.register_component(sh("A", "true"));
  g.register_component(sh("Z", "true"));
  EXPECT_NO_THROW(g.validate());
}

TEST(Graph, StagesListingShapeAndConcurrentPair) {
  wf::WorkflowGraph chain;
  chain.register_component(sh("sim2", "true", {"sim"}));
  chain.register_component(sh("sim", "true"));
  EXPECT_EQ(chain.validate(), (std::vector<wf::Stage>{{"sim"}, {"sim2"}}));

  wf::WorkflowGraph pair;
  pair.register_component(sh("trainer", "true"));
  pair.register_component(sh("sim", "true"));
  EXPECT_EQ(pair.validate(), (std::vector<wf::Stage>{{"sim", "trainer"}}));
}

TEST(Graph, DiamondDepths) {
  wf::WorkflowGraph g;
  g.register_component(sh("d", "true", {"b", "c"}));
  g.register_component(sh("c", "true", {"a"}));
  g.register_component(sh("b", "true", {"a"}));
  g.register_component(sh("a", "true"));
  g.register_component(sh("e", "true", {"a", "d"}));
  EXPECT_EQ(g.validate(), (std::vector<wf::Stage>{{"a"}, {"b", "c"}, {"d"}, {"e"}}));
}

TEST(Graph, CyclesNamed) {
  wf::WorkflowGraph two;
  two.register_component(sh("A", "true", {"B"}));
  two.register_component(sh("B", "true", {"A"}));
  EXPECT_NE(validation_message(two).find("cycle"), std::string::npos);

  wf::WorkflowGraph three;
  three.register_component(sh("x", "true", {"z"}));
  three.register_component(sh("y", "true", {"x"}));
  three.register_component(sh("z", "true", {"y"}));
  const auto msg = validation_message(three);
  for (const char *n : {"x", "y", "z"}) {
    EXPECT_NE(msg.find(n), std::string::npos) << msg;
  }

  wf::WorkflowGraph self;
  self.register_component(sh("s", "true", {"s"}));
  EXPECT_FALSE(validation_message(self).empty());
}

TEST(Graph, PlanningIsDeterministicProperty) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("c" + std::to_string(i));
    std::vector<wf::ComponentSpec> specs;
    for (int i = 0; i < n; ++i) {
      std::vector<std::string> deps;
      for (int j = 0; j < i; ++j) {
        if (rng() % 3 == 0) deps.push_back(names[j]);
      }
      specs.push_back(sh(names[i], "true", deps));
    }
    wf::WorkflowGraph a, b;
    for (const auto &s : specs) a.register_component(s);
    std::shuffle(specs.begin(), specs.end(), rng);
    for (const auto &s : specs) b.register_component(s);
    const auto stages = a.validate();
    EXPECT_EQ(stages, b.validate());
    // Every component appears once, after all of its dependencies.
    std::map<std::string, std::size_t> level;
    for (std::size_t i = 0; i < stages.size(); ++i) {
      EXPECT_TRUE(std::is_sorted(stages[i].begin(), stages[i].end()));
      for (const auto &c : stages[i]) level[c] = i;
    }
    EXPECT_EQ(level.size(), static_cast<std::size_t>(n));
    for (const auto &[from, to] : a.edges()) {
      EXPECT_LT(level[from], level[to]);
    }
  }
}

TEST(Launcher, ExpandLocalAndRemote) {
  auto spec = sh("x", "echo", {}, 3);
  spec.command = {"prog", "--rank", "{rank}", "--of", "{ranks}"};
  const auto local = wf::expand_commands(spec, {});
  ASSERT_EQ(local.size(), 3u);
  EXPECT_EQ(local[2], (std::vector<std::string>{"prog", "--rank", "2", "--of", "3"}));

  spec.placement = wf::Placement::remote;
  wf::LauncherConfig cfg;
  cfg.launcher = "mpiexec --bind";
  const auto remote = wf::expand_commands(spec, cfg);
  ASSERT_EQ(remote.size(), 1u);
  EXPECT_EQ(remote[0], (std::vector<std::string>{"mpiexec", "--bind", "-n", "3", "prog", "--rank",
                                                 "{rank}", "--of", "3"}));
}

TEST(Launcher, IndependentComponentsStartTogether) {
  wf::WorkflowGraph g;
  g.register_component(sh("a", "sleep 1"));
  g.register_component(sh("b", "sleep 1"));
  const auto r = wf::launch(g);
  ASSERT_TRUE(r.success) << r.error;
  const auto &a = r.at("a");
  const auto &b = r.at("b");
  EXPECT_LT(std::abs(a.start_time - b.start_time), 0.1);
  EXPECT_LT(std::max(a.start_time, b.start_time), std::min(a.end_time, b.end_time));
  EXPECT_GE(r.makespan, 1.0);
}

TEST(Launcher, DependencySoundness) {
  wf::WorkflowGraph g;
  g.register_component(sh("A", "sleep 0.3"));
  g.register_component(sh("B", "true", {"A"}));
  g.register_component(sh("C", "true", {"A", "B"}));
  const auto r = wf::launch(g);
  ASSERT_TRUE(r.success);
  for (const auto &[from, to] : g.edges()) {
    EXPECT_LE(r.at(from).end_time, r.at(to).start_time) << from << "->" << to;
  }
}

TEST(Launcher, FailureTerminatesPeersAndSkipsLaterStages) {
  TempDir dir("ff");
  wf::WorkflowGraph g;
  g.register_component(sh("bad", "sleep 0.2; exit 3"));
  g.register_component(sh("peer", "echo $$ > " + (dir / "peer.pid").string() + "; sleep 30"));
  g.register_component(sh("later", "true", {"bad"}));
  const auto r = wf::launch(g);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.at("bad").exit_code, 3);
  EXPECT_EQ(r.at("peer").exit_code, 128 + SIGTERM);
  EXPECT_FALSE(r.at("later").launched);
  EXPECT_EQ(r.at("later").exit_code, -1);
  EXPECT_LT(r.makespan, 5.0);
  EXPECT_NE(r.error.find("bad"), std::string::npos);
  pid_t pid = 0;
  std::ifstream(dir / "peer.pid") >> pid;
  ASSERT_GT(pid, 0);
  EXPECT_FALSE(group_alive(pid));
}

TEST(Launcher, StubbornPeerKilledAfterGrace) {
  TempDir dir("grace");
  wf::WorkflowGraph g;
  g.register_component(sh("bad", "sleep 0.2; exit 1"));
  g.register_component(sh("stubborn", "echo $$ > " + (dir / "pid").string() +
                                          "; trap '' TERM; while true; do sleep 0.05; done"));
  wf::LauncherConfig cfg;
  cfg.grace_period = 0.5;
  const auto r = wf::launch(g, cfg);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.at("stubborn").exit_code, 128 + SIGKILL);
  EXPECT_LT(r.makespan, 5.0);
  pid_t pid = 0;
  std::ifstream(dir / "pid") >> pid;
  ASSERT_GT(pid, 0);
  EXPECT_FALSE(group_alive(pid)); // grandchildren reaped with the group
}

TEST(Launcher, SpawnFailure) {
  wf::WorkflowGraph g;
  wf::ComponentSpec s;
  s.name = "ghost";
  s.command = {"/nonexistent/definitely-not-here"};
  g.register_component(s);
  const auto r = wf::launch(g);
  EXPECT_FALSE(r.success);
  EXPECT_NE(r.at("ghost").exit_code, 0);
  EXPECT_FALSE(r.error.empty());
}

TEST(Launcher, EnvRanksAndLogs) {
  TempDir dir("env");
  wf::WorkflowGraph g;
  auto s = sh("e", "test \"$FOO\" = bar && echo rank-$0", {}, 2);
  s.command = {"/bin/sh", "-c", "test \"$FOO\" = bar && echo rank-{rank}"};
  s.env = {{"FOO", "bar"}};
  g.register_component(s);
  wf::LauncherConfig cfg;
  cfg.log_dir = dir / "logs";
  const auto r = wf::launch(g, cfg);
  ASSERT_TRUE(r.success) << r.error;
  std::string line;
  std::ifstream(dir / "logs" / "e.r1.log") >> line;
  EXPECT_EQ(line, "rank-1");
}

TEST(Launcher, InvalidGraphThrows) {
  wf::WorkflowGraph g;
  g.register_component(sh("a", "true", {"missing"}));
  EXPECT_THROW(wf::launch(g), Error);
}

TEST(Launcher, ReportJson) {
  wf::WorkflowGraph g;
  g.register_component(sh("a", "exit 0"));
  const auto r = wf::launch(g);
  const auto j = nlohmann::json::parse(wf::to_json(r));
  EXPECT_TRUE(j.at("success").get<bool>());
  EXPECT_EQ(j.at("components").at(0).at("exit_code").get<int>(), 0);
}

TEST(WorkflowFile, Parses) {
  const auto w = wf::workflow_from_json(R"({
    "launcher": {"template": "{launcher} -np {ranks} {command}", "command": "srun", "grace_period": 2},
    "components": [
      {"name": "sim", "command": "run_sim --n 3", "ranks": 2},
      {"name": "sim2", "placement": "remote", "dependencies": ["sim"], "command": ["x", "y"],
       "env": {"A": "1"}}
    ]})");
  EXPECT_EQ(w.launcher.launcher, "srun");
  EXPECT_DOUBLE_EQ(w.launcher.grace_period, 2.0);
  EXPECT_EQ(w.graph.at("sim").command, (std::vector<std::string>{"run_sim", "--n", "3"}));
  EXPECT_EQ(w.graph.at("sim").ranks, 2);
  EXPECT_EQ(w.graph.at("sim2").placement, wf::Placement::remote);
  EXPECT_EQ(w.graph.at("sim2").env.at("A"), "1");
  EXPECT_EQ(w.graph.validate().size(), 2u);
  EXPECT_THROW(wf::workflow_from_json(R"({"components":[{"name":"a"}]})"), Error);
  EXPECT_THROW(wf::workflow_from_json("[1,2"), Error);
}
