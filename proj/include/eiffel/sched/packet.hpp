#pragma once

#include <cstdint>
#include <limits>

namespace eiffel {

using TimeNs = std::uint64_t;
using FlowId = std::uint32_t;

inline constexpr TimeNs kNsPerSec = 1'000'000'000ULL;

struct Packet {
  std::uint64_t id = 0;
  FlowId flow = 0;
  std::uint32_t size = 0;  // bytes
  // Policy-supplied rank (remaining flow size for pFabric).
  std::uint64_t rank = 0;
  TimeNs enqueue_ts = 0;
  TimeNs release_ts = 0;
};

// Bits per second to bytes per second.
[[nodiscard]] constexpr double bps_to_Bps(double bits_per_sec) noexcept { return bits_per_sec / 8.0; }

// Serialization time of size bytes at rate bytes/sec, rounded up to whole ns.
[[nodiscard]] TimeNs transmission_ns(std::uint32_t size, double rate_Bps);

// ts = max(now, last_ts) + size / rate; last_ts is updated to ts.
// Throws ConfigError unless rate > 0.
TimeNs compute_timestamp(TimeNs& last_ts, std::uint32_t size, double rate_Bps, TimeNs now);

}  // namespace eiffel
