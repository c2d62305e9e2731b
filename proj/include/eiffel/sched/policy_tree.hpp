#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eiffel/rank_queue.hpp"
#include "eiffel/sched/packet.hpp"

namespace eiffel {

enum class Policy { fifo, fair, lqf, pfabric, hclock };

[[nodiscard]] std::string_view to_string(Policy p) noexcept;
[[nodiscard]] Policy parse_policy(std::string_view name);

// pFabric on-dequeue rule: keep the flow rank at the minimum over its queued
// packets, or apply min(popped, front) verbatim.
enum class PfabricRule { min_queued, front };

struct NodeConfig {
  std::string id;
  std::string parent;  // empty for the root
  Policy policy = Policy::fair;
  double share = 1.0;
  double reservation_bps = 0.0;
  double limit_bps = 0.0;  // 0 = unlimited
  QueueSpec queue;
  // Rank units per bucket; policies quantize their real-valued tags by it.
  double granularity = 0.0;  // 0 = policy default
  PfabricRule pfabric_rule = PfabricRule::min_queued;
};

struct FlowConfig {
  FlowId id = 0;
  std::string leaf;
  double share = 1.0;
  double reservation_bps = 0.0;
  double limit_bps = 0.0;
  // Per-flow rate limiting and pacing via shaper timestamps.
  double max_rate_bps = 0.0;
  double pacing_rate_bps = 0.0;
};

struct ShaperConfig {
  TimeNs granularity_ns = 100'000;
  std::size_t num_buckets = 20'000;

  [[nodiscard]] TimeNs horizon_ns() const noexcept { return granularity_ns * num_buckets; }
};

struct PolicyTree {
  std::vector<NodeConfig> nodes;
  std::vector<FlowConfig> flows;
  ShaperConfig shaper;
  // Max packets a gated node may hold released but not yet taken.
  std::size_t outbox_depth = 2;

  // Throws ConfigError on structural problems (cycles, unknown parents,
  // mixed leaves, bad parameters).
  void validate() const;
};

[[nodiscard]] PolicyTree policy_tree_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json policy_tree_to_json(const PolicyTree& tree);
[[nodiscard]] PolicyTree load_policy_tree(const std::string& path);

// Single leaf holding every flow; handy for tests and the CLI.
[[nodiscard]] PolicyTree single_leaf_tree(Policy policy, const std::vector<FlowConfig>& flows,
                                          QueueSpec queue = {});

// Hierarchy with a paced root, an unlimited leaf A and a limited node B whose
// leaves are B1 and a limited B2. Flow 0 -> A, 1 -> B1, 2 -> B2.
struct HierarchyRates {
  double pacing_bps = 40e6;
  double b_limit_bps = 10e6;
  double b2_limit_bps = 7e6;
  double a_share = 1.0;
  double b_share = 1.0;
  double b1_share = 1.0;
  double b2_share = 3.0;
};
[[nodiscard]] PolicyTree shaped_hierarchy_tree(const HierarchyRates& rates = {});

}  // namespace eiffel
