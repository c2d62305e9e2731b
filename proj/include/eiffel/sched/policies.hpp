#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "eiffel/rank_queue.hpp"
#include "eiffel/sched/flow_state.hpp"
#include "eiffel/sched/policy_tree.hpp"

namespace eiffel {

struct PolicyCounters {
  std::uint64_t repositions = 0;
  std::uint64_t clamped_ranks = 0;
};

// Ranking hooks of a leaf node over its flows. The engine appends a packet to
// the flow FIFO before on_arrival() and pops it (with its meta) before
// on_service().
class LeafPolicy {
 public:
  LeafPolicy(std::vector<FlowState>& flows, const NodeConfig& cfg) : flows_(flows), cfg_(cfg) {}
  virtual ~LeafPolicy() = default;
  LeafPolicy(const LeafPolicy&) = delete;
  LeafPolicy& operator=(const LeafPolicy&) = delete;

  virtual void on_arrival(std::uint32_t f, TimeNs now) = 0;
  // Some flow can be served now.
  [[nodiscard]] virtual bool ready() const = 0;
  // Picks a flow and detaches it from the leaf queues. A forced flow must be
  // currently eligible.
  virtual std::uint32_t select(TimeNs now, std::optional<std::uint32_t> forced) = 0;
  virtual void on_service(std::uint32_t f, const Packet& p, const PacketMeta& m, TimeNs now) = 0;

  // Time-driven eligibility (hClock limits).
  [[nodiscard]] virtual std::optional<TimeNs> next_wakeup() const { return std::nullopt; }
  virtual std::size_t promote(TimeNs /*now*/) { return 0; }

  // Rank the flow is currently queued under, for traces.
  [[nodiscard]] virtual std::uint64_t flow_rank(std::uint32_t f) const = 0;

  [[nodiscard]] const PolicyCounters& counters() const noexcept { return counters_; }

 protected:
  Rank quantize(const RankQueue& q, double tag, double granularity);

  std::vector<FlowState>& flows_;
  NodeConfig cfg_;
  PolicyCounters counters_;
};

[[nodiscard]] std::unique_ptr<LeafPolicy> make_leaf_policy(std::vector<FlowState>& flows, const NodeConfig& cfg);

// LQF rank for a queue of the given bucket count: longer flows get lower ranks.
[[nodiscard]] Rank lqf_rank(std::size_t len, std::size_t num_buckets) noexcept;

}  // namespace eiffel
