#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace stagebench::workflow {

enum class Placement { local, remote };

std::string_view to_string(Placement p) noexcept;
Placement parse_placement(std::string_view name);

struct ComponentSpec {
  std::string name;
  Placement placement = Placement::local;
  std::vector<std::string> dependencies;
  // argv template. "{rank}" and "{ranks}" are substituted per process for
  // local placement; remote placement passes them through to the launcher.
  std::vector<std::string> command;
  int ranks = 1;
  std::map<std::string, std::string> env;
};

using Stage = std::vector<std::string>;

// Components plus finish-to-start dependency edges. Registration is
// permissive; validate() reports unknown names and cycles.
class WorkflowGraph {
public:
  // Throws Error(invalid_argument) for a duplicate or empty name.
  WorkflowGraph &register_component(ComponentSpec spec);

  const std::map<std::string, ComponentSpec> &components() const noexcept { return components_; }
  // (from, to): `to` depends on `from`. Sorted.
  std::vector<std::pair<std::string, std::string>> edges() const;
  std::size_t size() const noexcept { return components_.size(); }
  bool contains(const std::string &name) const { return components_.contains(name); }
  const ComponentSpec &at(const std::string &name) const;

  // Stages in launch order; a component sits one stage after its deepest
  // dependency, names sorted within a stage. Throws Error(validation) naming
  // unknown dependencies, self-dependencies, or the nodes of one cycle.
  std::vector<Stage> validate() const;

private:
  std::map<std::string, ComponentSpec> components_;
};

} // namespace stagebench::workflow
