#pragma once

#include "stagebench/common/bytes.hpp"

#include <cstddef>
#include <cstdint>

namespace stagebench::datastore {

// Checksummed payloads: bytes [0,4) hold the little-endian CRC32 of the rest,
// the rest is splitmix64 output seeded by `seed`. Lets a reader detect torn
// or mixed writes without knowing what the writer sent.
inline constexpr std::size_t min_payload_bytes = 8;

Bytes make_payload(std::size_t size, std::uint64_t seed);
void fill_payload(std::span<std::uint8_t> out, std::uint64_t seed);
bool verify_payload(ByteView payload) noexcept;

} // namespace stagebench::datastore
