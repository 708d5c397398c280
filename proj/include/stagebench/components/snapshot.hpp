#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stagebench::components {

struct SnapshotId {
  std::string producer;
  std::int64_t step = 0;

  auto operator<=>(const SnapshotId &) const = default;
};

// <producer>.step<step>.k<j>, with .r<rank> appended for rank > 0.
std::string snapshot_key(const SnapshotId &id, int j, int rank = 0);
std::string init_key(std::string_view producer, int rank = 0);
std::string stop_key(std::string_view trainer);
// Prefix shared by every snapshot key of a producer.
std::string snapshot_prefix(std::string_view producer);

// Keys published in the datastore by the orchestrator.
inline constexpr std::string_view epoch_key = "run.epoch";

struct ParsedKey {
  SnapshotId id;
  int j = 0;
  int rank = 0;
};

std::optional<ParsedKey> parse_snapshot_key(std::string_view key);

// Every key of one snapshot across the producer's ranks.
std::vector<std::string> snapshot_keys(const SnapshotId &id, int keys_per_snapshot,
                                       const std::vector<int> &ranks);

// emit_init + keys_per_snapshot * floor(steps / write_interval).
std::int64_t expected_write_events(std::int64_t steps, std::int64_t write_interval,
                                   int keys_per_snapshot, bool emit_init);

} // namespace stagebench::components
