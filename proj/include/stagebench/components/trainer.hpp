#pragma once

#include "stagebench/components/config.hpp"
#include "stagebench/datastore/datastore.hpp"
#include "stagebench/metrics/recorder.hpp"

#include <cstdint>
#include <string>

namespace stagebench::components {

struct TrainerSummary {
  std::int64_t iters_done = 0;
  std::int64_t reads_done = 0;
  std::int64_t snapshots_consumed = 0;
  std::int64_t torn_reads = 0;
  double t_exit = 0.0;
};

std::string to_json(const TrainerSummary &s);
TrainerSummary trainer_summary_from_json(std::string_view text);

// Producer ranks a trainer rank is responsible for: pr % trainer_ranks == rank.
std::vector<int> assigned_producer_ranks(int producer_ranks, int trainer_ranks, int rank);

// The trainer emulator loop. In blocking mode a poll that outlives
// poll_deadline throws Error(stall) naming the missing producers.
TrainerSummary run_trainer(const TrainerComponentConfig &cfg, datastore::DataStoreClient &store,
                           metrics::Recorder &recorder, int rank = 0);

} // namespace stagebench::components
