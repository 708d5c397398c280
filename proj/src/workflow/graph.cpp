#include "stagebench/workflow/graph.hpp"

#include "stagebench/common/error.hpp"

#include <algorithm>
#include <functional>

namespace stagebench::workflow {

std::string_view to_string(Placement p) noexcept {
  return p == Placement::local ? "local" : "remote";
}

Placement parse_placement(std::string_view name) {
  if (name == "local") {
    return Placement::local;
  }
  if (name == "remote") {
    return Placement::remote;
  }
  throw Error(Errc::invalid_argument, "placement must be local or remote, got '" +
                                          std::string(name) + "'");
}

WorkflowGraph &WorkflowGraph::register_component(ComponentSpec spec) {
  if (spec.name.empty()) {
    throw Error(Errc::invalid_argument, "component name must be non-empty");
  }
  if (components_.contains(spec.name)) {
    throw Error(Errc::invalid_argument, "component '" + spec.name + "' already registered");
  }
  auto name = spec.name;
  components_.emplace(std::move(name), std::move(spec));
  return *this;
}

const ComponentSpec &WorkflowGraph::at(const std::string &name) const {
  auto it = components_.find(name);
  if (it == components_.end()) {
    throw Error(Errc::invalid_argument, "no component '" + name + "'");
  }
  return it->second;
}

std::vector<std::pair<std::string, std::string>> WorkflowGraph::edges() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto &[name, spec] : components_) {
    for (const auto &dep : spec.dependencies) {
      out.emplace_back(dep, name);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Stage> WorkflowGraph::validate() const {
  std::vector<std::string> unknown;
  for (const auto &[name, spec] : components_) {
    for (const auto &dep : spec.dependencies) {
      if (dep == name) {
        throw Error(Errc::validation, "component '" + name + "' depends on itself");
      }
      if (!components_.contains(dep)) {
        unknown.push_back(name + " -> " + dep);
      }
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown dependencies:";
    for (const auto &u : unknown) {
      msg += " " + u;
    }
    throw Error(Errc::validation, msg);
  }

  // DFS in name order: colours detect back edges, depth gives the stage.
  enum class Mark { white, grey, black };
  std::map<std::string, Mark> mark;
  std::map<std::string, std::size_t> level;
  std::vector<std::string> path;
  std::function<void(const std::string &)> visit = [&](const std::string &name) {
    mark[name] = Mark::grey;
    path.push_back(name);
    std::size_t lvl = 0;
    auto deps = components_.at(name).dependencies;
    std::sort(deps.begin(), deps.end());
    for (const auto &dep : deps) {
      const Mark m = mark.contains(dep) ? mark[dep] : Mark::white;
      if (m == Mark::grey) {
        auto it = std::find(path.begin(), path.end(), dep);
        std::string cycle;
        for (; it != path.end(); ++it) {
          cycle += *it + " -> ";
        }
        cycle += dep;
        throw Error(Errc::validation, "dependency cycle: " + cycle);
      }
      if (m == Mark::white) {
        visit(dep);
      }
      lvl = std::max(lvl, level[dep] + 1);
    }
    level[name] = lvl;
    mark[name] = Mark::black;
    path.pop_back();
  };
  for (const auto &[name, spec] : components_) {
    if (!mark.contains(name)) {
      visit(name);
    }
  }

  std::vector<Stage> stages;
  for (const auto &[name, lvl] : level) {
    if (stages.size() <= lvl) {
      stages.resize(lvl + 1);
    }
    stages[lvl].push_back(name); // std::map iteration keeps names sorted
  }
  return stages;
}

} // namespace stagebench::workflow
