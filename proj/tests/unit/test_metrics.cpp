#include "stagebench/common/clock.hpp"
#include "stagebench/common/error.hpp"
#include "stagebench/metrics/aggregate.hpp"
#include "stagebench/metrics/recorder.hpp"
#include "stagebench/metrics/timeline.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

namespace sm = stagebench::metrics;
namespace fs = std::filesystem;
using stagebench::Errc;
using stagebench::Error;
using stagebench::test::TempDir;

namespace {

sm::EventRecord ev(std::string comp, sm::EventKind kind, double t, double d, std::uint64_t bytes = 0,
                   int rank = 0) {
  sm::EventRecord e;
  e.component = std::move(comp);
  e.rank = rank;
  e.kind = kind;
  e.t_start = t;
  e.duration = d;
  e.bytes = bytes;
  if (sm::is_transfer(kind)) {
    e.key = "k" + std::to_string(bytes);
  }
  return e;
}

void write_lines(const fs::path &p, const std::vector<sm::EventRecord> &events) {
  std::ofstream out(p);
  for (const auto &e : events) {
    out << sm::to_json_line(e) << "\n";
  }
}

const sm::SummaryRow &row(const sm::SummaryStats &s, const std::string &c, const std::string &k) {
  for (const auto &r : s.rows) {
    if (r.component == c && r.kind == k) return r;
  }
  throw std::runtime_error("no row " + c + "/" + k);
}

} // namespace

TEST(Event, JsonLineRoundTrip) {
  auto e = ev("sim \"x\"", sm::EventKind::write, 0.123456789012345678, 1e-7, 1258291, 3);
  e.key = "a\\b\n";
  const auto line = sm::to_json_line(e);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(sm::parse_event_line(line), e);
  const auto it = sm::parse_event_line(sm::to_json_line(ev("t", sm::EventKind::ai_iter, 1, 2)));
  EXPECT_FALSE(it.key.has_value());
}

TEST(Event, FieldNames) {
  const auto line = sm::to_json_line(ev("sim", sm::EventKind::read, 1, 2, 8));
  for (const char *f : {"\"component\"", "\"rank\"", "\"kind\"", "\"t_start\"", "\"duration\"",
                        "\"bytes\"", "\"key\""}) {
    EXPECT_NE(line.find(f), std::string::npos) << f;
  }
}

TEST(Event, InvariantsEnforced) {
  EXPECT_THROW(sm::validate(ev("s", sm::EventKind::read, 0, 1, 0)), Error);
  auto nokey = ev("s", sm::EventKind::write, 0, 1, 5);
  nokey.key.reset();
  EXPECT_THROW(sm::validate(nokey), Error);
  EXPECT_THROW(sm::validate(ev("s", sm::EventKind::sim_iter, 0, 1, 5)), Error);
  EXPECT_THROW(sm::validate(ev("s", sm::EventKind::sim_iter, 0, 0)), Error);
  EXPECT_THROW(sm::validate(ev("s", sm::EventKind::sim_iter, 0, 1, 0, -1)), Error);
  EXPECT_THROW(sm::parse_event_line("{\"component\":\"s\"}"), Error);
  EXPECT_THROW(sm::parse_event_line("not json"), Error);
}

TEST(Recorder, RejectsInvalidAtRecordTime) {
  TempDir dir("rec");
  sm::Recorder r(dir / "e.jsonl", 0);
  EXPECT_THROW(r.record(ev("s", sm::EventKind::read, 0, 1, 0)), Error);
  EXPECT_EQ(r.count(), 0u);
}

TEST(Recorder, MillionRecordsSurviveFlush) {
  TempDir dir("rec1m");
  const auto path = dir / "e.jsonl";
  {
    sm::Recorder r(path, 0);
    auto e = ev("sim", sm::EventKind::sim_iter, 0, 1e-3);
    const auto t0 = stagebench::monotonic_ns();
    for (int i = 0; i < 1000000; ++i) {
      e.t_start = i * 1e-3;
      r.record(e);
    }
    const double per = (stagebench::monotonic_ns() - t0) * 1e-9 / 1e6;
    EXPECT_LT(per, 10e-6);
    r.close();
  }
  std::ifstream in(path);
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, 1000000u);
  const auto log = sm::load_events({path});
  EXPECT_EQ(log.events.size(), 1000000u);
  EXPECT_EQ(log.malformed_lines, 0u);
}

TEST(Recorder, RawTimestampsRelativeToEpoch) {
  TempDir dir("recns");
  sm::Recorder r(dir / "e.jsonl", 1'000'000'000);
  r.record("sim", 0, sm::EventKind::sim_iter, 3'000'000'000, 3'500'000'000);
  r.record("sim", 0, sm::EventKind::poll, 4'000'000'000, 4'000'000'000); // clamped to 1 ns
  r.close();
  const auto log = sm::load_events({dir / "e.jsonl"});
  ASSERT_EQ(log.events.size(), 2u);
  EXPECT_DOUBLE_EQ(log.events[0].t_start, 2.0);
  EXPECT_DOUBLE_EQ(log.events[0].duration, 0.5);
  EXPECT_GT(log.events[1].duration, 0.0);
}

TEST(Aggregate, MeanAndSampleStd) {
  const auto s = sm::summarize({ev("a", sm::EventKind::sim_iter, 0, 1), ev("a", sm::EventKind::sim_iter, 1, 2),
                                ev("a", sm::EventKind::sim_iter, 3, 3)});
  const auto &r = row(s, "a", "sim_iter");
  EXPECT_EQ(r.count, 3u);
  EXPECT_DOUBLE_EQ(r.mean_s, 2.0);
  EXPECT_DOUBLE_EQ(r.std_s, 1.0);
}

TEST(Aggregate, SingleSampleFlagged) {
  const auto s = sm::summarize({ev("a", sm::EventKind::init, 0, 1)});
  EXPECT_EQ(s.rows.at(0).std_s, 0.0);
  EXPECT_TRUE(s.rows.at(0).single_sample);
  EXPECT_NE(sm::to_json(s).find("single_sample"), std::string::npos);
}

TEST(Aggregate, PoolsRanksAndFiles) {
  TempDir dir("pool");
  write_lines(dir / "a.jsonl", {ev("sim", sm::EventKind::sim_iter, 0, 1, 0, 0),
                                ev("sim", sm::EventKind::sim_iter, 1, 1, 0, 0)});
  write_lines(dir / "b.jsonl", {ev("sim", sm::EventKind::sim_iter, 0, 1, 0, 1)});
  const auto s = sm::aggregate(sm::find_event_files(dir.path()));
  EXPECT_EQ(row(s, "sim", "sim_iter").count, 3u);
}

TEST(Aggregate, EmptyIsError) {
  TempDir dir("empty");
  try {
    sm::aggregate(sm::find_event_files(dir.path()));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::empty_report);
    EXPECT_NE(std::string(e.what()).find("no events found"), std::string::npos);
  }
}

TEST(Aggregate, MalformedAndPartialLinesCounted) {
  TempDir dir("bad");
  {
    std::ofstream out(dir / "e.jsonl");
    out << sm::to_json_line(ev("s", sm::EventKind::sim_iter, 0, 1)) << "\n";
    out << "garbage\n";
    out << "{\"component\":\"s\",\"rank\":0,\"kind\":\"read\",\"t_start\":0,\"duration\":1,\"bytes\":0,\"key\":\"k\"}\n";
    out << "{\"component\":\"s\",\"ra"; // torn final line
  }
  const auto log = sm::load_events({dir / "e.jsonl"});
  EXPECT_EQ(log.events.size(), 1u);
  EXPECT_EQ(log.malformed_lines, 2u);
  EXPECT_EQ(log.partial_lines, 1u);
}

TEST(Aggregate, WarmupSkipPerStream) {
  std::vector<sm::EventRecord> evs;
  for (int r = 0; r < 2; ++r) {
    for (int i = 0; i < 10; ++i) {
      evs.push_back(ev("sim", sm::EventKind::sim_iter, i, i < 3 ? 100.0 : 1.0, 0, r));
    }
  }
  const auto s = sm::summarize(evs, 3);
  EXPECT_EQ(row(s, "sim", "sim_iter").count, 14u);
  EXPECT_DOUBLE_EQ(row(s, "sim", "sim_iter").mean_s, 1.0);
}

TEST(Aggregate, MatchesNaiveOracleOnRandomEvents) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> dur(1e-5, 0.5);
  std::uniform_int_distribution<std::uint64_t> bytes(1, 1 << 26);
  const sm::EventKind kinds[] = {sm::EventKind::sim_iter, sm::EventKind::read, sm::EventKind::write};
  std::vector<sm::EventRecord> evs;
  for (int i = 0; i < 100000; ++i) {
    const auto k = kinds[rng() % 3];
    evs.push_back(ev(rng() % 2 ? "sim" : "trainer", k, i * 1e-3, dur(rng),
                     sm::is_transfer(k) ? bytes(rng) : 0, static_cast<int>(rng() % 4)));
  }
  const auto s = sm::summarize(evs);
  std::shuffle(evs.begin(), evs.end(), rng);
  for (const auto &r : s.rows) {
    // Single-pass sums in shuffled order.
    double n = 0, sum = 0, sumsq = 0, tsum = 0, tsumsq = 0;
    std::uint64_t total = 0;
    for (const auto &e : evs) {
      if (e.component != r.component || std::string(sm::to_string(e.kind)) != r.kind) continue;
      n += 1;
      sum += e.duration;
      sumsq += e.duration * e.duration;
      const double g = sm::is_transfer(e.kind) ? e.bytes / e.duration / sm::bytes_per_gib : 0.0;
      tsum += g;
      tsumsq += g * g;
      total += e.bytes;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sumsq - n * mean * mean) / (n - 1));
    const double tmean = tsum / n;
    const double tsd = std::sqrt(std::max(0.0, (tsumsq - n * tmean * tmean) / (n - 1)));
    EXPECT_EQ(r.count, static_cast<std::size_t>(n));
    EXPECT_EQ(r.total_bytes, total);
    EXPECT_NEAR(r.mean_s, mean, 1e-12 * mean);
    EXPECT_NEAR(r.std_s, sd, 1e-9 * sd); // the single-pass oracle itself loses digits
    if (tmean > 0) {
      EXPECT_NEAR(r.mean_gibps, tmean, 1e-12 * tmean);
      EXPECT_NEAR(r.std_gibps, tsd, 1e-9 * tsd);
    }
  }
}

TEST(Throughput, HandArithmetic) {
  const auto pts = sm::throughput_table({ev("s", sm::EventKind::write, 0, 0.1, 33554432)}, "fs");
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_DOUBLE_EQ(pts[0].mean_gibps, 0.3125);
  EXPECT_EQ(pts[0].n, 1u);

  // 0.2 and 0.4 GiB/s for 2^30 bytes: 5 s and 2.5 s.
  const auto two = sm::throughput_table({ev("s", sm::EventKind::read, 0, 5.0, 1ull << 30),
                                         ev("s", sm::EventKind::read, 0, 2.5, 1ull << 30)},
                                        "fs");
  ASSERT_EQ(two.size(), 1u);
  EXPECT_NEAR(two[0].mean_gibps, 0.3, 1e-15);
  EXPECT_NEAR(two[0].std_gibps, std::sqrt(0.02), 1e-15);
  EXPECT_EQ(two[0].direction, "read");
}

TEST(Throughput, GroupsByPayloadAndDirectionSorted) {
  const auto pts = sm::throughput_table({ev("s", sm::EventKind::write, 0, 1, 200),
                                         ev("s", sm::EventKind::read, 0, 1, 100),
                                         ev("s", sm::EventKind::write, 0, 1, 100),
                                         ev("s", sm::EventKind::sim_iter, 0, 1)},
                                        "mem");
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0].payload_bytes, 100u);
  EXPECT_EQ(pts[0].direction, "read");
  EXPECT_EQ(pts[2].payload_bytes, 200u);
  const auto csv = sm::to_csv(pts);
  EXPECT_EQ(csv.rfind(sm::throughput_csv_header, 0), 0u);
}

TEST(ExecTime, Definition) {
  std::vector<sm::EventRecord> evs;
  for (int i = 0; i < 100; ++i) {
    evs.push_back(ev("trainer", sm::EventKind::ai_iter, i * 0.061, 0.061));
  }
  EXPECT_NEAR(sm::exec_time_per_iteration(evs, 100), 0.061, 1e-12);
  evs.push_back(ev("trainer", sm::EventKind::poll, 100 * 0.061, 1.0));
  EXPECT_GE(sm::exec_time_per_iteration(evs, 100), 0.061 + 1.0 / 100 - 1e-12);
  EXPECT_THROW(sm::exec_time_per_iteration(evs, 0), Error);
}

TEST(Timeline, LanesSpansAndWindow) {
  std::vector<sm::EventRecord> evs = {
      ev("trainer", sm::EventKind::init, 0.0, 0.5),
      ev("trainer", sm::EventKind::ai_iter, 0.5, 0.1),
      ev("trainer", sm::EventKind::ai_iter, 0.6, 0.1),
      ev("trainer", sm::EventKind::read, 0.7, 0.01, 64),
      ev("sim", sm::EventKind::sim_iter, 0.0, 0.2),
      ev("sim", sm::EventKind::write, 0.2, 0.01, 64),
  };
  const auto tl = sm::build_timeline(evs);
  ASSERT_EQ(tl.lanes.size(), 2u);
  EXPECT_EQ(tl.lanes[0].component, "sim");
  const auto &tr = tl.lanes[1].spans;
  ASSERT_FALSE(tr.empty());
  EXPECT_EQ(tr.front().category, sm::SpanCategory::init);
  // Back-to-back iterations merge into one compute span.
  EXPECT_EQ(tr[1].category, sm::SpanCategory::compute);
  EXPECT_EQ(tr[1].merged, 2u);

  const auto svg = sm::to_svg(tl, "run");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("#1f77b4"), std::string::npos);

  sm::TimelineOptions window;
  window.t0 = 10;
  window.t1 = 20;
  const auto empty = sm::build_timeline(evs, window);
  EXPECT_TRUE(empty.lanes.empty());
  EXPECT_NE(sm::to_svg(empty).find("</svg>"), std::string::npos);
}

TEST(Report, FormatNumberIsDeterministic) {
  EXPECT_EQ(sm::format_number(0.3125), "0.3125");
  EXPECT_EQ(sm::format_number(1.0 / 3.0), "0.333333333333333");
}
