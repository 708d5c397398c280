#pragma once

#include "stagebench/components/config.hpp"
#include "stagebench/datastore/datastore.hpp"
#include "stagebench/metrics/recorder.hpp"

#include <cstdint>
#include <string>

namespace stagebench::components {

struct SimSummary {
  std::int64_t steps_done = 0;
  std::int64_t writes_done = 0;
  bool stopped_by_steer = false;
  double t_exit = 0.0; // seconds since the run epoch
};

std::string to_json(const SimSummary &s);
SimSummary sim_summary_from_json(std::string_view text);

// The simulation emulator loop. Transport errors propagate as Error.
SimSummary run_simulation(const SimComponentConfig &cfg, datastore::DataStoreClient &store,
                          metrics::Recorder &recorder, int rank = 0);

} // namespace stagebench::components
