#include "stagebench/server/wire.hpp"

#include <gtest/gtest.h>

#include <random>

namespace w = stagebench::wire;
using stagebench::Bytes;

namespace {

w::Request random_request(std::mt19937_64 &rng) {
  static const w::Opcode ops[] = {w::Opcode::put,  w::Opcode::get,  w::Opcode::exists,
                                  w::Opcode::del,  w::Opcode::list, w::Opcode::ping,
                                  w::Opcode::shutdown};
  w::Request r;
  r.op = ops[rng() % 7];
  const bool keyed = r.op == w::Opcode::put || r.op == w::Opcode::get ||
                     r.op == w::Opcode::exists || r.op == w::Opcode::del;
  const std::size_t key_len = keyed ? 1 + rng() % 40 : (r.op == w::Opcode::list ? rng() % 10 : 0);
  for (std::size_t i = 0; i < key_len; ++i) {
    r.key.push_back(static_cast<char>(1 + rng() % 255));
  }
  if (r.op == w::Opcode::put) {
    r.value.resize(rng() % 3000);
    for (auto &b : r.value) {
      b = static_cast<std::uint8_t>(rng());
    }
  }
  return r;
}

} // namespace

TEST(Wire, BigEndianHelpers) {
  std::uint8_t buf[8];
  w::put_u32_be(buf, 0x01020304u);
  EXPECT_EQ(buf[0], 1);
  EXPECT_EQ(buf[3], 4);
  EXPECT_EQ(w::get_u32_be(buf), 0x01020304u);
  w::put_u64_be(buf, 0x0102030405060708ull);
  EXPECT_EQ(buf[0], 1);
  EXPECT_EQ(buf[7], 8);
  EXPECT_EQ(w::get_u64_be(buf), 0x0102030405060708ull);
}

TEST(Wire, RequestLayout) {
  w::Request r{w::Opcode::put, "ab", Bytes{9, 8, 7}};
  const auto b = w::encode_request(r);
  const Bytes expected = {0x01, 0, 0, 0, 2, 'a', 'b', 0, 0, 0, 0, 0, 0, 0, 3, 9, 8, 7};
  EXPECT_EQ(b, expected);
  const auto g = w::encode_request({w::Opcode::get, "k", {}});
  EXPECT_EQ(g, (Bytes{0x02, 0, 0, 0, 1, 'k'}));
}

TEST(Wire, ResponseLayout) {
  const auto b = w::encode_response({w::Status::not_found, {}});
  EXPECT_EQ(b, (Bytes{0x01, 0, 0, 0, 0, 0, 0, 0, 0}));
  const auto ok = w::encode_response({w::Status::ok, Bytes{'1'}});
  EXPECT_EQ(ok.size(), w::response_header_len + 1);
}

TEST(Wire, PipelinedStreamRoundTrip) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<w::Request> reqs;
    Bytes stream;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      reqs.push_back(random_request(rng));
      const auto b = w::encode_request(reqs.back());
      stream.insert(stream.end(), b.begin(), b.end());
    }
    w::MemorySource src(stream);
    for (int i = 0; i < n; ++i) {
      auto f = w::read_request(src);
      ASSERT_TRUE(std::holds_alternative<w::Request>(f)) << "trial " << trial << " frame " << i;
      const auto &got = std::get<w::Request>(f);
      EXPECT_EQ(got.op, reqs[i].op);
      EXPECT_EQ(got.key, reqs[i].key);
      EXPECT_EQ(got.value, reqs[i].value);
    }
    EXPECT_TRUE(std::holds_alternative<w::EndOfStream>(w::read_request(src)));
  }
}

TEST(Wire, ResponsesPipeline) {
  std::mt19937_64 rng(5);
  std::vector<w::Response> resps;
  Bytes stream;
  for (int i = 0; i < 30; ++i) {
    w::Response r{static_cast<w::Status>(rng() % 3), Bytes(rng() % 100, 0x5A)};
    resps.push_back(r);
    const auto b = w::encode_response(r);
    stream.insert(stream.end(), b.begin(), b.end());
  }
  w::MemorySource src(stream);
  for (const auto &r : resps) {
    const auto got = w::read_response(src);
    ASSERT_TRUE(got.has_value());
    EXPECT_EQ(*got, r);
  }
  EXPECT_FALSE(w::read_response(src).has_value());
}

TEST(Wire, UnknownOpcodeIsMalformed) {
  const Bytes b = {0x42, 0, 0, 0, 0};
  w::MemorySource src(b);
  EXPECT_TRUE(std::holds_alternative<w::Malformed>(w::read_request(src)));
}

TEST(Wire, TruncatedFrameIsMalformed) {
  auto b = w::encode_request({w::Opcode::put, "key", Bytes(100, 1)});
  b.resize(b.size() - 10);
  w::MemorySource src(b);
  EXPECT_TRUE(std::holds_alternative<w::Malformed>(w::read_request(src)));
}

TEST(Wire, OversizeKeyRejectedAndStreamContinues) {
  Bytes stream = w::encode_request_header(w::Opcode::get, std::string(w::max_key_len + 1, 'k'), 0);
  const auto ping = w::encode_request({w::Opcode::ping, "", {}});
  stream.insert(stream.end(), ping.begin(), ping.end());
  w::MemorySource src(stream);
  EXPECT_TRUE(std::holds_alternative<w::Rejected>(w::read_request(src)));
  auto next = w::read_request(src);
  ASSERT_TRUE(std::holds_alternative<w::Request>(next));
  EXPECT_EQ(std::get<w::Request>(next).op, w::Opcode::ping);
}

TEST(Wire, EmptyOrNulKeyRejected) {
  for (const std::string &key : {std::string(), std::string("a\0b", 3)}) {
    Bytes stream = w::encode_request({w::Opcode::exists, key, {}});
    w::MemorySource src(stream);
    EXPECT_TRUE(std::holds_alternative<w::Rejected>(w::read_request(src)));
    EXPECT_EQ(src.remaining(), 0u);
  }
}
