#include "stagebench/datastore/crc32.hpp"

#include "stagebench/common/error.hpp"

#include <array>
#include <cstring>

namespace stagebench::datastore {

namespace {

constexpr std::uint32_t kPoly = 0xEDB88320u;

constexpr std::array<std::array<std::uint32_t, 256>, 8> make_tables() {
  std::array<std::array<std::uint32_t, 256>, 8> t{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) {
      c = (c & 1u) ? (c >> 1) ^ kPoly : c >> 1;
    }
    t[0][i] = c;
  }
  for (std::uint32_t i = 0; i < 256; ++i) {
    for (std::size_t s = 1; s < 8; ++s) {
      t[s][i] = (t[s - 1][i] >> 8) ^ t[0][t[s - 1][i] & 0xFFu];
    }
  }
  return t;
}

constexpr auto kTables = make_tables();

} // namespace

std::uint32_t crc32_update(std::uint32_t crc, ByteView data) noexcept {
  std::uint32_t c = ~crc;
  const std::uint8_t *p = data.data();
  std::size_t n = data.size();
  while (n >= 8) {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;
    std::memcpy(&lo, p, 4);
    std::memcpy(&hi, p + 4, 4);
    // Little-endian host assumed (x86-64 / aarch64).
    lo ^= c;
    c = kTables[7][lo & 0xFF] ^ kTables[6][(lo >> 8) & 0xFF] ^
        kTables[5][(lo >> 16) & 0xFF] ^ kTables[4][lo >> 24] ^
        kTables[3][hi & 0xFF] ^ kTables[2][(hi >> 8) & 0xFF] ^
        kTables[1][(hi >> 16) & 0xFF] ^ kTables[0][hi >> 24];
    p += 8;
    n -= 8;
  }
  while (n-- > 0) {
    c = (c >> 8) ^ kTables[0][(c ^ *p++) & 0xFF];
  }
  return ~c;
}

std::uint32_t crc32(ByteView data) noexcept { return crc32_update(0, data); }

std::size_t shard_of(std::string_view key, std::size_t n) {
  if (n == 0) {
    throw Error(Errc::invalid_argument, "shard count must be >= 1");
  }
  return static_cast<std::size_t>(crc32(key)) % n;
}

} // namespace stagebench::datastore
