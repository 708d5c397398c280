#pragma once

#include "stagebench/common/bytes.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace stagebench::datastore {

// CRC-32/ISO-HDLC: reflected polynomial 0xEDB88320, init and final XOR
// 0xFFFFFFFF. Slicing-by-8 table implementation.
std::uint32_t crc32(ByteView data) noexcept;

inline std::uint32_t crc32(std::string_view s) noexcept { return crc32(as_bytes(s)); }

// Incremental form: pass the previous return value as `crc` (start with 0).
std::uint32_t crc32_update(std::uint32_t crc, ByteView data) noexcept;

// CRC32(key) mod n. Throws Error(invalid_argument) when n == 0.
std::size_t shard_of(std::string_view key, std::size_t n);

} // namespace stagebench::datastore
