#pragma once

#include "stagebench/kernels/kernel_spec.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stagebench::components {

struct SimComponentConfig {
  std::string name = "sim";
  std::vector<kernels::KernelSpec> kernels;
  std::int64_t steps = 1000;
  std::int64_t write_interval = 100;
  int keys_per_snapshot = 2;
  std::size_t payload_bytes = 1 << 20;
  std::int64_t stop_check_interval = 10;
  bool emit_init_write = true;
  // Reserved key whose presence stops the loop; empty disables steering.
  std::string stop_key;
  std::uint64_t seed = 1;
  // Fault injection: sleep stall_seconds before staging the given snapshot
  // (1-based). 0 disables.
  std::int64_t stall_at_snapshot = 0;
  double stall_seconds = 0.0;
  std::string scratch_dir; // for I/O kernels
};

struct TrainerComponentConfig {
  std::string name = "trainer";
  kernels::KernelSpec kernel;
  std::int64_t total_iters = 500;
  std::int64_t read_interval = 10;
  std::vector<std::string> producers;
  bool blocking = false;
  std::size_t payload_bytes = 1 << 20;
  // What the producers were told; needed to name the keys to wait for.
  int keys_per_snapshot = 2;
  std::int64_t producer_write_interval = 100;
  int producer_ranks = 1;
  int ranks = 1;
  bool await_init = true;
  bool steer = true;
  bool verify_payloads = true;
  double poll_deadline = 300.0;
  double poll_interval = 0.001;
  std::uint64_t seed = 2;
};

// Time-mode training stand-in used when a config gives only iter_time.
kernels::KernelSpec iteration_kernel(double iter_time, bool busy = true);

void validate(const SimComponentConfig &cfg);
void validate(const TrainerComponentConfig &cfg);

// JSON round trips. Unknown fields are ignored; missing fields keep the
// defaults above. The trainer accepts either "kernel" or "iter_time".
std::string to_json(const SimComponentConfig &cfg);
std::string to_json(const TrainerComponentConfig &cfg);
SimComponentConfig sim_config_from_json(std::string_view text);
TrainerComponentConfig trainer_config_from_json(std::string_view text);

std::string read_text_file(const std::filesystem::path &path);
void write_text_file(const std::filesystem::path &path, std::string_view text);

} // namespace stagebench::components
