#include "stagebench/cli/commands.hpp"

#include "stagebench/common/error.hpp"
#include "stagebench/datastore/crc32.hpp"
#include "stagebench/datastore/key_codec.hpp"
#include "stagebench/server/memserver.hpp"
#include "stagebench/server/server_manager.hpp"

#include <fmt/format.h>

#include <functional>
#include <iostream>
#include <random>
#include <sstream>

namespace stagebench::cli {

namespace fs = std::filesystem;

namespace {

struct CheckResult {
  bool ok = false;
  std::string detail;
};

CheckResult check_crc() {
  const auto a = datastore::crc32(std::string_view("123456789"));
  const auto b = datastore::crc32(std::string_view(""));
  return {a == 0xCBF43926u && b == 0u, fmt::format("crc32(\"123456789\")={:08X}", a)};
}

CheckResult check_key_codec() {
  std::mt19937_64 rng(20240501);
  std::uniform_int_distribution<int> len(1, 64);
  std::uniform_int_distribution<int> byte(1, 255);
  for (int i = 0; i < 1000; ++i) {
    std::string key(static_cast<std::size_t>(len(rng)), '\0');
    for (auto &c : key) {
      c = static_cast<char>(byte(rng));
    }
    const auto enc = datastore::encode_key(key);
    for (const char c : enc) {
      const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' ||
                        c == '-' || c == '%';
      if (!safe) {
        return {false, fmt::format("case {}: unsafe byte in encoding", i)};
      }
    }
    const auto dec = datastore::decode_key(enc);
    if (!dec || *dec != key) {
      return {false, fmt::format("case {}: round trip mismatch", i)};
    }
  }
  return {true, "1000 random keys round-tripped"};
}

CheckResult check_wire_ping() {
  server::MemServer srv(net::Endpoint{"127.0.0.1", 0});
  srv.start();
  const auto ep = srv.endpoint().to_string();
  const bool ok = server::ping(ep);
  srv.stop();
  return {ok, "PING via " + ep};
}

CheckResult check_smoke(const SelftestOptions &st) {
  const fs::path out = fs::temp_directory_path() /
                       fmt::format("stagebench-selftest-{}", std::random_device{}());
  PatternOptions o;
  o.backend = "filesystem";
  o.out = out.string();
  o.payload_bytes = {65536};
  o.sim_time = 0.002;
  o.sim_steps = static_cast<std::int64_t>(st.smoke_seconds / o.sim_time);
  o.ai_time = 0.005;
  o.trainer_iters = std::max<std::int64_t>(10, static_cast<std::int64_t>(st.smoke_seconds * 0.5 / o.ai_time));
  o.grace_period = 2.0;
  o.poll_deadline = 30.0;
  if (!st.root.empty()) {
    o.roots = {st.root};
  }

  std::ostringstream sink;
  auto *saved = std::cout.rdbuf(sink.rdbuf());
  CheckResult r;
  try {
    const int rc = cmd_pattern1(o);
    r = {rc == exit_ok, rc == exit_ok ? "pattern1 on filesystem completed" : "pattern1 exited 1"};
  } catch (const std::exception &e) {
    r = {false, e.what()};
  }
  std::cout.rdbuf(saved);
  std::error_code ec;
  fs::remove_all(out, ec);
  return r;
}

} // namespace

int cmd_selftest(const SelftestOptions &opts) {
  const std::vector<std::pair<std::string, std::function<CheckResult()>>> checks = {
      {"crc32-check-value", check_crc},
      {"key-codec-fuzz", check_key_codec},
      {"wire-ping", check_wire_ping},
      {"pattern1-smoke", [&] { return check_smoke(opts); }},
  };
  bool all_ok = true;
  for (const auto &[name, fn] : checks) {
    CheckResult r;
    try {
      r = fn();
    } catch (const std::exception &e) {
      r = {false, e.what()};
    }
    all_ok = all_ok && r.ok;
    std::cout << fmt::format("{:<4}  {:<18}  {}", r.ok ? "PASS" : "FAIL", name, r.detail)
              << std::endl;
  }
  if (!all_ok) {
    std::cout << "selftest failed" << std::endl;
  }
  return all_ok ? exit_ok : exit_failure;
}

} // namespace stagebench::cli
