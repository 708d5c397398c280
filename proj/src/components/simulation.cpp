#include "stagebench/components/simulation.hpp"

#include "stagebench/common/clock.hpp"
#include "stagebench/common/error.hpp"
#include "stagebench/components/snapshot.hpp"
#include "stagebench/datastore/payload.hpp"
#include "stagebench/kernels/kernel.hpp"

#include <json.hpp>

namespace stagebench::components {

using metrics::EventKind;

std::string to_json(const SimSummary &s) {
  nlohmann::ordered_json j = {{"steps_done", s.steps_done},
                              {"writes_done", s.writes_done},
                              {"stopped_by_steer", s.stopped_by_steer},
                              {"t_exit", s.t_exit}};
  return j.dump(2) + "\n";
}

SimSummary sim_summary_from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  SimSummary s;
  s.steps_done = j.at("steps_done").get<std::int64_t>();
  s.writes_done = j.at("writes_done").get<std::int64_t>();
  s.stopped_by_steer = j.at("stopped_by_steer").get<bool>();
  s.t_exit = j.at("t_exit").get<double>();
  return s;
}

SimSummary run_simulation(const SimComponentConfig &cfg, datastore::DataStoreClient &store,
                          metrics::Recorder &recorder, int rank) {
  validate(cfg);
  if (!cfg.scratch_dir.empty()) {
    std::filesystem::create_directories(cfg.scratch_dir);
  }
  const kernels::KernelContext ctx{cfg.scratch_dir, rank};
  std::vector<kernels::Kernel> kernels;
  kernels.reserve(cfg.kernels.size());
  for (const auto &spec : cfg.kernels) {
    kernels.emplace_back(spec, ctx);
  }
  kernels::Rng rng(cfg.seed + static_cast<std::uint64_t>(rank));
  Bytes payload(cfg.payload_bytes);
  SimSummary out;

  auto staged = [&](const std::string &key, ByteView value) {
    const auto s = monotonic_ns();
    const auto e = store.stage_write(key, value);
    recorder.record(cfg.name, rank, EventKind::write, s, e, value.size(), key);
    ++out.writes_done;
  };

  if (cfg.emit_init_write) {
    const nlohmann::json meta = {{"name", cfg.name},
                                 {"rank", rank},
                                 {"steps", cfg.steps},
                                 {"write_interval", cfg.write_interval},
                                 {"keys_per_snapshot", cfg.keys_per_snapshot},
                                 {"payload_bytes", cfg.payload_bytes}};
    staged(init_key(cfg.name, rank), as_bytes(meta.dump()));
  }

  for (std::int64_t iter = 1; iter <= cfg.steps; ++iter) {
    const auto s = monotonic_ns();
    for (auto &k : kernels) {
      k.run(rng);
    }
    recorder.record(cfg.name, rank, EventKind::sim_iter, s, monotonic_ns());
    out.steps_done = iter;

    if (iter % cfg.write_interval == 0) {
      const auto snapshot = iter / cfg.write_interval;
      if (snapshot == cfg.stall_at_snapshot && cfg.stall_seconds > 0.0) {
        sleep_for_seconds(cfg.stall_seconds);
      }
      for (int j = 0; j < cfg.keys_per_snapshot; ++j) {
        const std::uint64_t seed = cfg.seed ^ (static_cast<std::uint64_t>(iter) << 20) ^
                                   (static_cast<std::uint64_t>(j) << 8) ^
                                   static_cast<std::uint64_t>(rank);
        datastore::fill_payload(payload, seed);
        staged(snapshot_key({cfg.name, iter}, j, rank), payload);
      }
    }

    if (!cfg.stop_key.empty() && iter % cfg.stop_check_interval == 0) {
      const auto ps = monotonic_ns();
      const bool stop = store.exists(cfg.stop_key);
      recorder.record(cfg.name, rank, EventKind::poll, ps, monotonic_ns());
      if (stop) {
        out.stopped_by_steer = true;
        break;
      }
    }
  }
  recorder.flush();
  out.t_exit = recorder.seconds_since_epoch(monotonic_ns());
  return out;
}

} // namespace stagebench::components
