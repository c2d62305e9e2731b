#pragma once

#include <cstdint>
#include <vector>

#include "eiffel/sched/policy_tree.hpp"

namespace eiffel::sim {

// One step of an offline trace: enqueue `packet`, or dequeue once.
struct TraceOp {
  bool dequeue = false;
  Packet packet;
};

// Reference dequeue order for a single-leaf tree, computed by scanning every
// queued packet on each dequeue. Flows tied on rank go in the order their
// current rank was set. Supports fifo, fair, lqf and pfabric; lqf assumes
// lengths below num_buckets. Throws ConfigError otherwise.
[[nodiscard]] std::vector<std::uint64_t> oracle_order(Policy policy, const std::vector<FlowConfig>& flows,
                                                      const std::vector<TraceOp>& ops);

// Same trace through the engine on single_leaf_tree(policy, flows, queue).
[[nodiscard]] std::vector<std::uint64_t> engine_order(Policy policy, const std::vector<FlowConfig>& flows,
                                                      const std::vector<TraceOp>& ops, QueueSpec queue);

// Random trace: up to max_flows flows, each sending a flow of random size
// whose packets carry the flow's remaining packet count as rank.
// Dequeues are interleaved with arrivals and the trace ends drained.
[[nodiscard]] std::vector<TraceOp> random_trace(std::uint64_t seed, std::size_t max_flows, std::size_t max_packets);

}  // namespace eiffel::sim
