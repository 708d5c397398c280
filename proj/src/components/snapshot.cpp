#include "stagebench/components/snapshot.hpp"

#include "stagebench/common/error.hpp"

#include <charconv>

namespace stagebench::components {

namespace {

// Parses a non-negative decimal with no sign or leading zeros (except "0").
std::optional<std::int64_t> parse_uint(std::string_view s) {
  if (s.empty() || (s.size() > 1 && s[0] == '0')) {
    return std::nullopt;
  }
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0) {
    return std::nullopt;
  }
  return v;
}

std::string rank_suffix(int rank) { return rank > 0 ? ".r" + std::to_string(rank) : ""; }

} // namespace

std::string snapshot_prefix(std::string_view producer) {
  return std::string(producer) + ".step";
}

std::string snapshot_key(const SnapshotId &id, int j, int rank) {
  return snapshot_prefix(id.producer) + std::to_string(id.step) + ".k" + std::to_string(j) +
         rank_suffix(rank);
}

std::string init_key(std::string_view producer, int rank) {
  return std::string(producer) + ".init" + rank_suffix(rank);
}

std::string stop_key(std::string_view trainer) { return std::string(trainer) + ".stop"; }

std::optional<ParsedKey> parse_snapshot_key(std::string_view key) {
  // Producer names may contain dots, so anchor on the last ".step".
  const auto pos = key.rfind(".step");
  if (pos == std::string_view::npos || pos == 0) {
    return std::nullopt;
  }
  ParsedKey out;
  out.id.producer = std::string(key.substr(0, pos));
  std::string_view rest = key.substr(pos + 5);

  const auto kpos = rest.find(".k");
  if (kpos == std::string_view::npos) {
    return std::nullopt;
  }
  const auto step = parse_uint(rest.substr(0, kpos));
  if (!step) {
    return std::nullopt;
  }
  out.id.step = *step;
  rest = rest.substr(kpos + 2);

  std::string_view jpart = rest;
  if (const auto rpos = rest.find(".r"); rpos != std::string_view::npos) {
    jpart = rest.substr(0, rpos);
    const auto rank = parse_uint(rest.substr(rpos + 2));
    if (!rank || *rank == 0 || *rank > 1'000'000) {
      return std::nullopt;
    }
    out.rank = static_cast<int>(*rank);
  }
  const auto j = parse_uint(jpart);
  if (!j || *j > 1'000'000) {
    return std::nullopt;
  }
  out.j = static_cast<int>(*j);
  return out;
}

std::vector<std::string> snapshot_keys(const SnapshotId &id, int keys_per_snapshot,
                                       const std::vector<int> &ranks) {
  std::vector<std::string> keys;
  for (const int r : ranks) {
    for (int j = 0; j < keys_per_snapshot; ++j) {
      keys.push_back(snapshot_key(id, j, r));
    }
  }
  return keys;
}

std::int64_t expected_write_events(std::int64_t steps, std::int64_t write_interval,
                                   int keys_per_snapshot, bool emit_init) {
  if (steps < 0 || write_interval < 1 || keys_per_snapshot < 1) {
    throw Error(Errc::invalid_argument, "expected_write_events: bad arguments");
  }
  return (emit_init ? 1 : 0) + keys_per_snapshot * (steps / write_interval);
}

} // namespace stagebench::components
