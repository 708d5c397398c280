#pragma once

#include <chrono>
#include <cstdint>

namespace stagebench {

using SteadyClock = std::chrono::steady_clock;

// Nanoseconds on the system-wide monotonic clock. On Linux this clock is
// shared by every process on the host, which is what lets per-process event
// logs be merged against one run epoch.
std::int64_t monotonic_ns() noexcept;

double seconds_between(SteadyClock::time_point a,
                       SteadyClock::time_point b) noexcept;

// Process CPU time (user + system) in seconds.
double process_cpu_seconds() noexcept;

// Sleeps for `seconds` (no-op when <= 0).
void sleep_for_seconds(double seconds);

} // namespace stagebench
