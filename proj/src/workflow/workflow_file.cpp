#include "stagebench/workflow/workflow_file.hpp"

#include "stagebench/common/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace stagebench::workflow {

namespace {

std::vector<std::string> command_of(const nlohmann::json &j) {
  std::vector<std::string> out;
  if (j.is_string()) {
    std::istringstream in(j.get<std::string>());
    for (std::string tok; in >> tok;) {
      out.push_back(tok);
    }
  } else {
    out = j.get<std::vector<std::string>>();
  }
  if (out.empty()) {
    throw Error(Errc::invalid_argument, "component command is empty");
  }
  return out;
}

} // namespace

WorkflowFile workflow_from_json(std::string_view text) {
  WorkflowFile wf;
  try {
    const auto j = nlohmann::json::parse(text);
    if (const auto it = j.find("launcher"); it != j.end()) {
      wf.launcher.remote_template = it->value("template", wf.launcher.remote_template);
      wf.launcher.launcher = it->value("command", wf.launcher.launcher);
      wf.launcher.grace_period = it->value("grace_period", wf.launcher.grace_period);
    }
    for (const auto &c : j.at("components")) {
      ComponentSpec spec;
      spec.name = c.at("name").get<std::string>();
      spec.placement = parse_placement(c.value("placement", std::string("local")));
      spec.dependencies = c.value("dependencies", std::vector<std::string>{});
      spec.command = command_of(c.at("command"));
      spec.ranks = c.value("ranks", 1);
      if (spec.ranks < 1) {
        throw Error(Errc::invalid_argument, "component '" + spec.name + "': ranks must be >= 1");
      }
      spec.env = c.value("env", std::map<std::string, std::string>{});
      wf.graph.register_component(std::move(spec));
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::invalid_argument, std::string("workflow file: ") + e.what());
  }
  return wf;
}

WorkflowFile load_workflow(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::invalid_argument, "cannot open workflow file " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return workflow_from_json(ss.str());
}

} // namespace stagebench::workflow
