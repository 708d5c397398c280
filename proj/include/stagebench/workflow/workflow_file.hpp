#pragma once

#include "stagebench/workflow/graph.hpp"
#include "stagebench/workflow/launcher.hpp"

#include <filesystem>
#include <string_view>

namespace stagebench::workflow {

struct WorkflowFile {
  WorkflowGraph graph;
  LauncherConfig launcher;
};

// {"launcher": {"template", "command", "grace_period"},
//  "components": [{"name", "placement", "dependencies", "command", "ranks", "env"}]}
// A string command is split on whitespace. Throws Error(invalid_argument).
WorkflowFile workflow_from_json(std::string_view text);
WorkflowFile load_workflow(const std::filesystem::path &path);

} // namespace stagebench::workflow
