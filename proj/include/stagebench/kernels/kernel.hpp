#pragma once

#include "stagebench/kernels/kernel_spec.hpp"

#include <complex>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

namespace stagebench::kernels {

struct KernelContext {
  std::filesystem::path scratch_dir; // required by I/O kernels
  int rank = 0;
};

struct KernelOutcome {
  double wall_duration = 0.0;
  std::int64_t inner_iterations = 0;
  std::uint64_t bytes_touched = 0;
  // Effective time/count after resolving the timing mode (PDF sampled once
  // per run). Exactly one is meaningful.
  double resolved_run_time = 0.0;
  std::int64_t resolved_run_count = 0;
};

// A kernel with its working buffers allocated once, so repeated runs (one
// per simulation iteration) measure the primitive and not the setup.
class Kernel {
public:
  Kernel(KernelSpec spec, KernelContext ctx = {});
  ~Kernel();
  Kernel(Kernel &&) noexcept;
  Kernel &operator=(Kernel &&) noexcept;

  // Count mode: exactly `count` executions. Time mode: executes until the
  // first post-execution clock check at or past the deadline, so the
  // overshoot is at most one execution. With busy=false the primitive runs
  // once and the remainder is slept.
  KernelOutcome run(Rng &rng);

  // One execution of the primitive; returns bytes moved (0 for compute).
  std::uint64_t execute_once(Rng &rng);

  const KernelSpec &spec() const noexcept { return spec_; }

private:
  struct Buffers;
  KernelSpec spec_;
  KernelContext ctx_;
  std::unique_ptr<Buffers> buf_;
};

KernelOutcome run_kernel(const KernelSpec &spec, Rng &rng, const KernelContext &ctx = {});

// Median seconds of >= 11 single executions after 3 warm-ups.
double calibrate_primitive(KernelKind kind, const std::vector<std::size_t> &data_size,
                           const KernelContext &ctx = {});

} // namespace stagebench::kernels
