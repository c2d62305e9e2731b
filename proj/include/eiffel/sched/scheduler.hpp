#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "eiffel/rank_queue.hpp"
#include "eiffel/sched/flow_state.hpp"
#include "eiffel/sched/packet.hpp"
#include "eiffel/sched/policies.hpp"
#include "eiffel/sched/policy_tree.hpp"
#include "eiffel/sched/shaper.hpp"

namespace eiffel {

// A packet leaving a shaper stage.
struct StageEvent {
  TimeNs time = 0;  // release instant
  TimeNs ts = 0;    // stage timestamp
  StageRef stage;
  Packet packet;
};

struct SchedulerStats {
  std::uint64_t enqueued = 0;
  std::uint64_t dequeued = 0;
  std::uint64_t shaper_inserts = 0;
  std::uint64_t stage_releases = 0;
  std::uint64_t node_repositions = 0;
  std::uint64_t batched = 0;  // packets served by turn continuation
};

// Scheduling tree with per-flow ranking, on-dequeue ranking and a single
// shaper. Leaves rank flows through a LeafPolicy; internal nodes share
// bandwidth among children by start-time fair queueing.
//
// A node with a limit is gated: it moves one packet at a time from its
// subtree into the shaper, stamped at its rate, and holds released packets
// in a short outbox that its parent serves. A gated root is the pacing stage;
// its outbox feeds the wire.
class Scheduler {
 public:
  using StageObserver = std::function<void(const StageEvent&)>;

  explicit Scheduler(const PolicyTree& tree);

  // Throws ConfigError for unknown flows.
  void enqueue(Packet p, TimeNs now);
  [[nodiscard]] std::optional<Packet> dequeue(TimeNs now);
  // Delivers every shaper entry and limit wakeup due at now.
  std::size_t release(TimeNs now);
  [[nodiscard]] std::optional<TimeNs> next_event_time() const;

  // The root has a packet to hand out.
  [[nodiscard]] bool has_ready() const;
  [[nodiscard]] std::size_t backlog() const noexcept { return backlog_; }
  [[nodiscard]] std::size_t flow_backlog(FlowId id) const;

  // Rates in bits/s; 0 disables. Applies from the next packet.
  void set_flow_rates(FlowId id, double max_rate_bps, double pacing_rate_bps);
  // Turn continuation: keep serving the same flow while the turn stays within
  // this many bytes. 0 serves one packet per decision.
  void set_batch_bytes(std::uint32_t bytes) noexcept { batch_bytes_ = bytes; }
  void set_stage_observer(StageObserver obs) { observer_ = std::move(obs); }

  [[nodiscard]] const FlowState& flow(FlowId id) const;
  [[nodiscard]] std::uint64_t flow_rank(FlowId id) const;
  [[nodiscard]] std::vector<FlowId> flow_ids() const;
  [[nodiscard]] std::optional<std::uint32_t> node_index(const std::string& id) const;
  [[nodiscard]] const std::string& node_name(std::uint32_t index) const;
  [[nodiscard]] std::string stage_name(const StageRef& s) const;
  [[nodiscard]] const SchedulerStats& stats() const noexcept { return stats_; }
  [[nodiscard]] PolicyCounters policy_counters() const;
  [[nodiscard]] const Shaper& shaper() const noexcept { return shaper_; }

 private:
  struct Node {
    NodeConfig cfg;
    int parent = -1;
    std::vector<std::uint32_t> children;
    std::unique_ptr<LeafPolicy> leaf;       // leaves only
    std::unique_ptr<RankQueue> children_q;  // internal nodes only
    double vtime = 0.0;
    double granularity = 1.0;

    // Entry in the parent's queue.
    Handle h;
    bool queued = false;
    bool in_service = false;
    double start_tag = 0.0;
    double finish_tag = 0.0;

    // Gating.
    double limit_Bps = 0.0;
    TimeNs last_ts = 0;
    bool inflight = false;
    std::deque<Packet> outbox;

    // Ancestors root..this, when none of them is gated.
    std::optional<std::vector<std::uint32_t>> direct_path;

    [[nodiscard]] bool gated() const noexcept { return limit_Bps > 0.0; }
  };

  struct Forced {
    const std::vector<std::uint32_t>* path;
    std::uint32_t flow;
  };

  std::uint32_t flow_index(FlowId id) const;
  void arrive(std::uint32_t f, Packet p, TimeNs now);
  [[nodiscard]] bool internal_ready(const Node& n) const;
  [[nodiscard]] bool ready(const Node& n) const;
  void internal_changed(std::uint32_t n, TimeNs now);
  void refresh(std::uint32_t n, TimeNs now);
  void pull(std::uint32_t n, TimeNs now);
  Packet take(std::uint32_t n, TimeNs now, const Forced* forced, std::size_t depth);
  Packet take_internal(std::uint32_t n, TimeNs now, const Forced* forced, std::size_t depth);
  void on_release(ShaperEntry&& e, TimeNs now);
  Rank child_key(const Node& parent, double tag);
  std::optional<Forced> continuation() const;

  std::vector<Node> nodes_;
  std::vector<FlowState> flows_;
  std::unordered_map<FlowId, std::uint32_t> flow_by_id_;
  std::unordered_map<std::string, std::uint32_t> node_by_id_;
  std::uint32_t root_ = 0;
  Shaper shaper_;
  std::size_t outbox_depth_;
  std::uint64_t arrival_seq_ = 0;
  std::size_t backlog_ = 0;
  std::uint32_t batch_bytes_ = 0;
  std::optional<std::uint32_t> turn_flow_;
  std::uint32_t turn_bytes_ = 0;
  StageObserver observer_;
  SchedulerStats stats_;
};

}  // namespace eiffel
