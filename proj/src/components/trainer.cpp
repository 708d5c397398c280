#include "stagebench/components/trainer.hpp"

#include "stagebench/common/clock.hpp"
#include "stagebench/common/error.hpp"
#include "stagebench/components/snapshot.hpp"
#include "stagebench/datastore/payload.hpp"
#include "stagebench/kernels/kernel.hpp"

#include <json.hpp>

#include <map>
#include <set>

namespace stagebench::components {

using metrics::EventKind;

std::string to_json(const TrainerSummary &s) {
  nlohmann::ordered_json j = {{"iters_done", s.iters_done},
                              {"reads_done", s.reads_done},
                              {"snapshots_consumed", s.snapshots_consumed},
                              {"torn_reads", s.torn_reads},
                              {"t_exit", s.t_exit}};
  return j.dump(2) + "\n";
}

TrainerSummary trainer_summary_from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  TrainerSummary s;
  s.iters_done = j.at("iters_done").get<std::int64_t>();
  s.reads_done = j.at("reads_done").get<std::int64_t>();
  s.snapshots_consumed = j.at("snapshots_consumed").get<std::int64_t>();
  s.torn_reads = j.value("torn_reads", std::int64_t{0});
  s.t_exit = j.at("t_exit").get<double>();
  return s;
}

std::vector<int> assigned_producer_ranks(int producer_ranks, int trainer_ranks, int rank) {
  std::vector<int> out;
  for (int pr = 0; pr < producer_ranks; ++pr) {
    if (pr % trainer_ranks == rank) {
      out.push_back(pr);
    }
  }
  return out;
}

namespace {

class TrainerLoop {
public:
  TrainerLoop(const TrainerComponentConfig &cfg, datastore::DataStoreClient &store,
              metrics::Recorder &recorder, int rank)
      : cfg_(cfg), store_(store), rec_(recorder), rank_(rank),
        ranks_(assigned_producer_ranks(cfg.producer_ranks, cfg.ranks, rank)) {
    for (const auto &p : cfg.producers) {
      last_step_[p] = 0;
    }
  }

  bool has_transport() const { return !ranks_.empty() && !cfg_.producers.empty(); }

  void await_init() {
    std::vector<std::string> keys;
    for (const auto &p : cfg_.producers) {
      for (const int r : ranks_) {
        keys.push_back(init_key(p, r));
      }
    }
    if (!store_.poll_staged_data(keys, cfg_.poll_deadline, cfg_.poll_interval)) {
      throw Error(Errc::stall, "trainer '" + cfg_.name + "': producers never staged init (" +
                                   missing_producers(keys) + ")");
    }
  }

  void read_tick() {
    if (cfg_.blocking) {
      blocking_tick();
    } else {
      async_tick();
    }
  }

  TrainerSummary summary;

private:
  void read_snapshot(const SnapshotId &id) {
    for (const auto &key : snapshot_keys(id, cfg_.keys_per_snapshot, ranks_)) {
      const auto s = monotonic_ns();
      const auto value = store_.stage_read(key);
      const auto e = monotonic_ns();
      if (!value) {
        throw Error(Errc::validation, "staged key vanished before read: " + key);
      }
      if (value->empty()) {
        throw Error(Errc::validation, "staged key is empty: " + key);
      }
      if (cfg_.verify_payloads && !datastore::verify_payload(*value)) {
        ++summary.torn_reads;
      }
      rec_.record(cfg_.name, rank_, EventKind::read, s, e, value->size(), key);
      ++summary.reads_done;
    }
    last_step_[id.producer] = id.step;
    ++summary.snapshots_consumed;
  }

  // Zero-timeout scan: consume every complete snapshot newer than the last
  // one read from each producer, oldest first.
  void async_tick() {
    const std::size_t per_snapshot =
        static_cast<std::size_t>(cfg_.keys_per_snapshot) * ranks_.size();
    const std::set<int> mine(ranks_.begin(), ranks_.end());
    for (const auto &p : cfg_.producers) {
      const auto s = monotonic_ns();
      const auto keys = store_.list_keys(snapshot_prefix(p));
      rec_.record(cfg_.name, rank_, EventKind::poll, s, monotonic_ns());

      std::map<std::int64_t, std::size_t> present;
      for (const auto &k : keys) {
        const auto parsed = parse_snapshot_key(k);
        if (parsed && parsed->id.producer == p && parsed->id.step > last_step_[p] &&
            parsed->j < cfg_.keys_per_snapshot && mine.contains(parsed->rank)) {
          ++present[parsed->id.step];
        }
      }
      for (const auto &[step, count] : present) {
        if (count == per_snapshot) {
          read_snapshot({p, step});
        }
      }
    }
  }

  // Waits for the next snapshot of every producer, then reads all of them.
  void blocking_tick() {
    std::vector<SnapshotId> ids;
    std::vector<std::string> keys;
    for (const auto &p : cfg_.producers) {
      ids.push_back({p, last_step_[p] + cfg_.producer_write_interval});
      const auto k = snapshot_keys(ids.back(), cfg_.keys_per_snapshot, ranks_);
      keys.insert(keys.end(), k.begin(), k.end());
    }
    const auto s = monotonic_ns();
    const bool ok = store_.poll_staged_data(keys, cfg_.poll_deadline, cfg_.poll_interval);
    rec_.record(cfg_.name, rank_, EventKind::poll, s, monotonic_ns());
    if (!ok) {
      throw Error(Errc::stall, "trainer '" + cfg_.name + "': poll deadline exceeded waiting for " +
                                   missing_producers(keys));
    }
    for (const auto &id : ids) {
      read_snapshot(id);
    }
  }

  std::string missing_producers(const std::vector<std::string> &keys) {
    std::set<std::string> missing;
    for (const auto &k : keys) {
      if (!store_.exists(k)) {
        const auto parsed = parse_snapshot_key(k);
        missing.insert(parsed ? parsed->id.producer : k.substr(0, k.rfind(".init")));
      }
    }
    std::string out;
    for (const auto &m : missing) {
      out += (out.empty() ? "" : ", ") + m;
    }
    return out.empty() ? "none" : out;
  }

  const TrainerComponentConfig &cfg_;
  datastore::DataStoreClient &store_;
  metrics::Recorder &rec_;
  int rank_;
  std::vector<int> ranks_;
  std::map<std::string, std::int64_t> last_step_;
};

} // namespace

TrainerSummary run_trainer(const TrainerComponentConfig &cfg, datastore::DataStoreClient &store,
                           metrics::Recorder &recorder, int rank) {
  validate(cfg);
  const auto init_start = monotonic_ns();
  kernels::Kernel kernel(cfg.kernel, kernels::KernelContext{{}, rank});
  kernels::Rng rng(cfg.seed + static_cast<std::uint64_t>(rank));
  TrainerLoop loop(cfg, store, recorder, rank);
  if (cfg.await_init && loop.has_transport()) {
    loop.await_init();
  }
  recorder.record(cfg.name, rank, EventKind::init, init_start, monotonic_ns());

  for (std::int64_t iter = 1; iter <= cfg.total_iters; ++iter) {
    const auto s = monotonic_ns();
    kernel.run(rng);
    recorder.record(cfg.name, rank, EventKind::ai_iter, s, monotonic_ns());
    loop.summary.iters_done = iter;
    if (iter % cfg.read_interval == 0 && loop.has_transport()) {
      loop.read_tick();
    }
  }

  if (cfg.steer && rank == 0) {
    const auto key = stop_key(cfg.name);
    const auto s = monotonic_ns();
    const auto e = store.stage_write(key, std::string_view("stop"));
    recorder.record(cfg.name, rank, EventKind::write, s, e, 4, key);
  }
  recorder.flush();
  loop.summary.t_exit = recorder.seconds_since_epoch(monotonic_ns());
  return loop.summary;
}

} // namespace stagebench::components
