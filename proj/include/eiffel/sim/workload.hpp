#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eiffel/sched/packet.hpp"

namespace eiffel::sim {

enum class SizeKind { fixed, mtu, mixed };
enum class ArrivalKind { backlogged, poisson };

struct SizeDist {
  SizeKind kind = SizeKind::mtu;
  std::uint32_t bytes = 1500;  // fixed only

  // mixed draws 64 / 576 / 1500 with weights 5 / 1 / 4.
  [[nodiscard]] std::uint32_t draw(std::mt19937_64& rng) const;
};

struct FlowWorkload {
  FlowId id = 0;
  ArrivalKind arrival = ArrivalKind::backlogged;
  double rate_bps = 0.0;         // offered load, poisson only
  std::uint64_t flow_bytes = 0;  // total to send; 0 = unbounded
};

struct Workload {
  std::uint64_t seed = 1;
  TimeNs duration_ns = kNsPerSec;
  double link_bps = 100e6;
  SizeDist sizes;
  // Generator stops handing a flow packets once this many are in the scheduler.
  std::size_t per_flow_cap = 32;
  std::uint32_t batch_bytes = 10'000;
  TimeNs window_ns = 100'000'000;
  // Remaining-size ranks are expressed in these units (rounded up).
  std::uint32_t rank_unit_bytes = 1500;
  bool record_trace = false;
  bool record_stages = false;
  // Empty: every flow of the tree, backlogged.
  std::vector<FlowWorkload> flows;
};

[[nodiscard]] Workload workload_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json workload_to_json(const Workload& w);
[[nodiscard]] Workload load_workload(const std::string& path);

}  // namespace eiffel::sim
