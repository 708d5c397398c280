#include "stagebench/datastore/crc32.hpp"
#include "stagebench/common/error.hpp"

#include <gtest/gtest.h>
#include <zlib.h>

#include <array>
#include <random>

namespace sd = stagebench::datastore;

namespace {

// Bit-at-a-time reference, independent of the table implementation.
std::uint32_t crc32_bitwise(std::string_view s) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (const unsigned char c : s) {
    crc ^= c;
    for (int i = 0; i < 8; ++i) {
      crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
    }
  }
  return crc ^ 0xFFFFFFFFu;
}

std::uint32_t crc32_zlib(std::string_view s) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef *>(s.data()), static_cast<uInt>(s.size())));
}

std::string random_string(std::mt19937_64 &rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> byte(0, 255);
  std::string s(len(rng), '\0');
  for (auto &c : s) {
    c = static_cast<char>(byte(rng));
  }
  return s;
}

} // namespace

TEST(Crc32, CheckValue) {
  EXPECT_EQ(sd::crc32(std::string_view("123456789")), 0xCBF43926u);
  EXPECT_EQ(sd::crc32(std::string_view("")), 0u);
}

TEST(Crc32, ShardOfCheckValue) { EXPECT_EQ(sd::shard_of("123456789", 16), 6u); }

TEST(Crc32, ShardOfZeroThrows) {
  EXPECT_THROW(sd::shard_of("k", 0), stagebench::Error);
}

TEST(Crc32, MatchesBitwiseAndZlibOracles) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const auto s = random_string(rng, 300);
    const auto got = sd::crc32(std::string_view(s));
    ASSERT_EQ(got, crc32_bitwise(s)) << "case " << i;
    ASSERT_EQ(got, crc32_zlib(s)) << "case " << i;
  }
}

TEST(Crc32, IncrementalEqualsOneShot) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto s = random_string(rng, 500);
    std::uniform_int_distribution<std::size_t> cut(0, s.size());
    const auto k = cut(rng);
    const auto a = stagebench::as_bytes(std::string_view(s).substr(0, k));
    const auto b = stagebench::as_bytes(std::string_view(s).substr(k));
    EXPECT_EQ(sd::crc32_update(sd::crc32_update(0, a), b), sd::crc32(std::string_view(s)));
  }
}

TEST(Crc32, ShardsAreBalanced) {
  constexpr std::size_t n = 16;
  constexpr int keys = 160000;
  std::array<int, n> counts{};
  for (int i = 0; i < keys; ++i) {
    ++counts[sd::shard_of("sim.step" + std::to_string(i) + ".k0", n)];
  }
  const double expected = static_cast<double>(keys) / n;
  for (const int c : counts) {
    EXPECT_NEAR(c, expected, expected * 0.05);
  }
}

TEST(Crc32, ShardIsStableAndInRange) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_string(rng, 64);
    const std::size_t n = 1 + rng() % 64;
    const auto a = sd::shard_of(s, n);
    EXPECT_LT(a, n);
    EXPECT_EQ(a, sd::shard_of(s, n));
    EXPECT_EQ(a, crc32_bitwise(s) % n);
  }
}
