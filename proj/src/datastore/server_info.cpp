#include "stagebench/datastore/server_info.hpp"

#include "stagebench/common/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace stagebench::datastore {

using nlohmann::json;

std::string_view to_string(BackendKind kind) noexcept {
  switch (kind) {
  case BackendKind::filesystem:
    return "filesystem";
  case BackendKind::nodelocal:
    return "nodelocal";
  case BackendKind::memserver:
    return "memserver";
  }
  return "unknown";
}

std::optional<BackendKind> parse_backend_kind(std::string_view name) noexcept {
  if (name == "filesystem") {
    return BackendKind::filesystem;
  }
  if (name == "nodelocal") {
    return BackendKind::nodelocal;
  }
  if (name == "memserver") {
    return BackendKind::memserver;
  }
  return std::nullopt;
}

void validate(const ServerInfo &info) {
  if (info.shard_count < 1) {
    throw Error(Errc::invalid_argument, "shard_count must be >= 1");
  }
  if (info.kind == BackendKind::memserver) {
    if (info.endpoints.empty() || !info.roots.empty()) {
      throw Error(Errc::invalid_argument, "memserver requires endpoints and no roots");
    }
    if (info.shard_count != info.endpoints.size()) {
      throw Error(Errc::invalid_argument, "memserver shard_count must equal endpoint count");
    }
  } else if (info.roots.empty() || !info.endpoints.empty()) {
    throw Error(Errc::invalid_argument,
                std::string(to_string(info.kind)) + " requires roots and no endpoints");
  }
}

std::string to_json(const ServerInfo &info) {
  json j;
  j["kind"] = std::string(to_string(info.kind));
  j["endpoints"] = info.endpoints;
  j["roots"] = info.roots;
  j["shard_count"] = info.shard_count;
  return j.dump(2);
}

ServerInfo server_info_from_json(std::string_view text) {
  ServerInfo info;
  try {
    const json j = json::parse(text);
    const auto kind = parse_backend_kind(j.at("kind").get<std::string>());
    if (!kind) {
      throw Error(Errc::invalid_argument, "unknown backend kind in server info");
    }
    info.kind = *kind;
    info.endpoints = j.value("endpoints", std::vector<std::string>{});
    info.roots = j.value("roots", std::vector<std::string>{});
    info.shard_count = j.at("shard_count").get<std::size_t>();
  } catch (const json::exception &e) {
    throw Error(Errc::invalid_argument, std::string("bad server info: ") + e.what());
  }
  validate(info);
  return info;
}

void save_server_info(const ServerInfo &info, const std::filesystem::path &path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << to_json(info) << '\n';
    if (!out) {
      throw Error(Errc::io, "cannot write server info to " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

ServerInfo load_server_info(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::not_initialized, "cannot open server info " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return server_info_from_json(ss.str());
}

} // namespace stagebench::datastore
