#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stagebench::datastore {

enum class BackendKind { filesystem, nodelocal, memserver };

std::string_view to_string(BackendKind kind) noexcept;
std::optional<BackendKind> parse_backend_kind(std::string_view name) noexcept;

inline bool is_directory_backend(BackendKind kind) noexcept {
  return kind != BackendKind::memserver;
}

// Connection descriptor handed from the server manager to clients.
struct ServerInfo {
  BackendKind kind = BackendKind::filesystem;
  std::vector<std::string> endpoints; // host:port, memserver only
  std::vector<std::string> roots;     // directory backends only
  std::size_t shard_count = 1;

  friend bool operator==(const ServerInfo &, const ServerInfo &) = default;
};

// Throws Error(invalid_argument) when the fields disagree with the kind.
void validate(const ServerInfo &info);

std::string to_json(const ServerInfo &info);
ServerInfo server_info_from_json(std::string_view text);

void save_server_info(const ServerInfo &info, const std::filesystem::path &path);
ServerInfo load_server_info(const std::filesystem::path &path);

} // namespace stagebench::datastore
