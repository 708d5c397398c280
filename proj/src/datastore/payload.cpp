#include "stagebench/datastore/payload.hpp"

#include "stagebench/common/error.hpp"
#include "stagebench/datastore/crc32.hpp"

#include <cstring>

namespace stagebench::datastore {

namespace {

std::uint64_t splitmix64(std::uint64_t &state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void store_le32(std::uint8_t *dst, std::uint32_t v) noexcept {
  for (int i = 0; i < 4; ++i) {
    dst[i] = static_cast<std::uint8_t>(v >> (8 * i));
  }
}

} // namespace

void fill_payload(std::span<std::uint8_t> out, std::uint64_t seed) {
  if (out.size() < min_payload_bytes) {
    throw Error(Errc::invalid_argument, "payload must be at least 8 bytes");
  }
  std::uint64_t state = seed;
  std::size_t i = 4;
  for (; i + 8 <= out.size(); i += 8) {
    const std::uint64_t r = splitmix64(state);
    std::memcpy(out.data() + i, &r, 8);
  }
  if (i < out.size()) {
    const std::uint64_t r = splitmix64(state);
    std::memcpy(out.data() + i, &r, out.size() - i);
  }
  store_le32(out.data(), crc32(ByteView(out.data() + 4, out.size() - 4)));
}

Bytes make_payload(std::size_t size, std::uint64_t seed) {
  Bytes out(size);
  fill_payload(out, seed);
  return out;
}

bool verify_payload(ByteView payload) noexcept {
  if (payload.size() < min_payload_bytes) {
    return false;
  }
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) {
    stored |= static_cast<std::uint32_t>(payload[static_cast<std::size_t>(i)]) << (8 * i);
  }
  return stored == crc32(payload.subspan(4));
}

} // namespace stagebench::datastore
