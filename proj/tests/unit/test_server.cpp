#include "stagebench/server/memserver.hpp"
#include "stagebench/common/error.hpp"
#include "stagebench/datastore/datastore.hpp"
#include "stagebench/server/server_manager.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <thread>

namespace ss = stagebench::server;
namespace sd = stagebench::datastore;
namespace w = stagebench::wire;
namespace fs = std::filesystem;
using stagebench::Bytes;
using stagebench::Errc;
using stagebench::Error;
using stagebench::test::TempDir;

namespace {

w::Response call(ss::KeyValueStore &kv, w::Opcode op, std::string key = {}, Bytes value = {}) {
  w::Request r{op, std::move(key), std::move(value)};
  return ss::handle_request(r, kv);
}

std::string text(const Bytes &b) { return {b.begin(), b.end()}; }

} // namespace

TEST(HandleRequest, Semantics) {
  ss::KeyValueStore kv;
  EXPECT_EQ(call(kv, w::Opcode::get, "k").status, w::Status::not_found);
  EXPECT_EQ(call(kv, w::Opcode::exists, "k").status, w::Status::not_found);
  EXPECT_EQ(call(kv, w::Opcode::put, "k", Bytes{1, 2}).status, w::Status::ok);
  const auto got = call(kv, w::Opcode::get, "k");
  EXPECT_EQ(got.status, w::Status::ok);
  EXPECT_EQ(got.payload, (Bytes{1, 2}));
  EXPECT_EQ(call(kv, w::Opcode::exists, "k").status, w::Status::ok);
  EXPECT_EQ(text(call(kv, w::Opcode::del, "k").payload), "1");
  EXPECT_EQ(text(call(kv, w::Opcode::del, "k").payload), "0");
  EXPECT_EQ(call(kv, w::Opcode::ping).status, w::Status::ok);
}

TEST(HandleRequest, ListIsSortedAndNewlineJoined) {
  ss::KeyValueStore kv;
  for (const char *k : {"b.2", "a.1", "b.1", "c"}) {
    call(kv, w::Opcode::put, k, Bytes{0});
  }
  EXPECT_EQ(text(call(kv, w::Opcode::list, "b.").payload), "b.1\nb.2");
  EXPECT_EQ(text(call(kv, w::Opcode::list, "").payload), "a.1\nb.1\nb.2\nc");
  EXPECT_EQ(text(call(kv, w::Opcode::list, "zzz").payload), "");
}

TEST(KeyValueStore, ConcurrentWritersAcrossPartitions) {
  ss::KeyValueStore kv;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&kv, t] {
      for (int i = 0; i < 2000; ++i) {
        kv.put("t" + std::to_string(t) + "." + std::to_string(i), Bytes{static_cast<std::uint8_t>(t)});
      }
    });
  }
  for (auto &th : threads) {
    th.join();
  }
  EXPECT_EQ(kv.size(), 8000u);
  EXPECT_EQ(kv.keys_with_prefix("t3.").size(), 2000u);
}

TEST(MemServer, StartPingStop) {
  ss::MemServer srv({"127.0.0.1", 0});
  srv.start();
  EXPECT_NE(srv.endpoint().port, 0);
  EXPECT_TRUE(ss::ping(srv.endpoint().to_string()));
  srv.stop();
  srv.stop();
  EXPECT_FALSE(ss::ping(srv.endpoint().to_string()));
}

TEST(MemServer, OccupiedPortFailsStartup) {
  ss::MemServer a({"127.0.0.1", 0});
  a.start();
  ss::MemServer b(a.endpoint());
  try {
    b.start();
    FAIL() << "second bind succeeded";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::startup);
  }
}

TEST(MemServer, ShutdownRequestWakesWaiter) {
  ss::MemServer srv({"127.0.0.1", 0});
  srv.start();
  sd::ServerInfo info;
  info.kind = sd::BackendKind::memserver;
  info.endpoints = {srv.endpoint().to_string()};
  info.shard_count = 1;
  std::thread waiter([&] { srv.wait_for_shutdown(); });
  EXPECT_EQ(ss::send_shutdown(info), 1u);
  waiter.join();
  srv.stop();
}

TEST(MemServer, ManyClientsInterleave) {
  ss::MemServer srv({"127.0.0.1", 0});
  srv.start();
  sd::ServerInfo info;
  info.kind = sd::BackendKind::memserver;
  info.endpoints = {srv.endpoint().to_string()};
  info.shard_count = 1;
  std::vector<std::thread> threads;
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&, t] {
      sd::DataStoreClient c(info, "c" + std::to_string(t));
      for (int i = 0; i < 100; ++i) {
        const std::string key = "c" + std::to_string(t) + "." + std::to_string(i);
        c.stage_write(key, std::string_view(key));
        const auto v = c.stage_read(key);
        ASSERT_TRUE(v.has_value());
        ASSERT_EQ(text(*v), key);
      }
    });
  }
  for (auto &th : threads) {
    th.join();
  }
  EXPECT_EQ(srv.store().size(), 600u);
  srv.stop();
  EXPECT_EQ(srv.store().size(), 0u);
}

TEST(ServerManager, DirectoryBackendCreatesShardsAndInfo) {
  TempDir dir("mgr");
  ss::ServerConfig cfg;
  cfg.kind = sd::BackendKind::nodelocal;
  cfg.roots = {(dir / "store").string()};
  cfg.shard_count = 3;
  cfg.info_path = dir / "info.json";
  ss::ServerManager m(cfg);
  const auto &info = m.start_server();
  EXPECT_EQ(info.shard_count, 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_TRUE(fs::is_directory(dir / "store" / ("shard_" + std::to_string(i))));
  }
  const auto loaded = sd::load_server_info(dir / "info.json");
  EXPECT_EQ(loaded.kind, sd::BackendKind::nodelocal);
  EXPECT_EQ(loaded.roots, info.roots);
  m.stop_server();
}

TEST(ServerManager, MemserverCluster) {
  TempDir dir("mgr2");
  ss::ServerConfig cfg;
  cfg.kind = sd::BackendKind::memserver;
  cfg.bind = {"127.0.0.1:0", "127.0.0.1:0"};
  cfg.info_path = dir / "info.json";
  ss::ServerManager m(cfg);
  const auto &info = m.start_server();
  ASSERT_EQ(info.endpoints.size(), 2u);
  EXPECT_EQ(info.shard_count, 2u);
  for (const auto &ep : info.endpoints) {
    EXPECT_TRUE(ss::ping(ep));
  }
  sd::DataStoreClient c(sd::load_server_info(dir / "info.json"), "c");
  c.stage_write("x", std::string_view("1"));
  EXPECT_TRUE(c.exists("x"));
  m.stop_server();
}

TEST(ServerManager, FailedStartWritesNoInfo) {
  TempDir dir("mgr3");
  ss::MemServer blocker({"127.0.0.1", 0});
  blocker.start();
  ss::ServerConfig cfg;
  cfg.kind = sd::BackendKind::memserver;
  cfg.bind = {blocker.endpoint().to_string()};
  cfg.info_path = dir / "info.json";
  ss::ServerManager m(cfg);
  EXPECT_THROW(m.start_server(), Error);
  EXPECT_FALSE(fs::exists(dir / "info.json"));
}

TEST(ServerManager, CorruptShardPathFails) {
  TempDir dir("mgr4");
  fs::create_directories(dir / "store");
  { std::ofstream(dir / "store" / "shard_0") << "not a dir"; }
  ss::ServerConfig cfg;
  cfg.kind = sd::BackendKind::filesystem;
  cfg.roots = {(dir / "store").string()};
  cfg.shard_count = 2;
  ss::ServerManager m(cfg);
  EXPECT_THROW(m.start_server(), Error);
}
