#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "eiffel/sched/policy_tree.hpp"
#include "eiffel/sim/workload.hpp"

namespace eiffel::sim {

struct TraceRecord {
  TimeNs time = 0;
  std::string event;  // enqueue | dequeue
  FlowId flow = 0;
  std::uint64_t packet = 0;
  std::uint64_t rank = 0;
};

struct StageRecord {
  TimeNs time = 0;
  TimeNs ts = 0;
  std::string stage;
  FlowId flow = 0;
  std::uint32_t size = 0;
};

struct FlowMetrics {
  FlowId id = 0;
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  double throughput_bps = 0.0;
  std::vector<double> window_bps;  // fixed windows of Workload::window_ns
  std::vector<TimeNs> departures;  // wire times, for window checks
  std::vector<std::uint32_t> sizes;
};

struct SimMetrics {
  TimeNs duration_ns = 0;
  std::uint64_t packets_in = 0;
  std::uint64_t packets_out = 0;
  std::uint64_t queued_at_end = 0;
  std::uint64_t deferred = 0;  // arrivals held back by the per-flow cap
  std::uint64_t peak_flow_backlog = 0;
  double aggregate_bps = 0.0;
  std::vector<FlowMetrics> flows;
  std::vector<std::uint64_t> order;  // packet ids as dequeued
  std::vector<TraceRecord> trace;
  std::vector<StageRecord> stages;
  // served flow rank minus the best queued flow rank, single-leaf trees only
  std::map<std::int64_t, std::uint64_t> rank_error;

  [[nodiscard]] bool conserved() const noexcept { return packets_in == packets_out + queued_at_end; }
  [[nodiscard]] const FlowMetrics& flow(FlowId id) const;
};

// Throws ConfigError on invalid trees or workloads.
[[nodiscard]] SimMetrics run_sim(const PolicyTree& tree, const Workload& workload);

void write_trace_jsonl(std::ostream& out, const std::vector<TraceRecord>& trace);

// Most bytes seen in any window [t, t + window) over the given events.
[[nodiscard]] std::uint64_t max_window_bytes(const std::vector<TimeNs>& times, const std::vector<std::uint32_t>& sizes,
                                             TimeNs window);

}  // namespace eiffel::sim
