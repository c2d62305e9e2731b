#pragma once

#include <cstdint>
#include <deque>
#include <limits>

#include "eiffel/link_pool.hpp"
#include "eiffel/sched/packet.hpp"
#include "eiffel/sched/policy_tree.hpp"

namespace eiffel {

inline constexpr std::uint64_t kNoRank = std::numeric_limits<std::uint64_t>::max();

// Per-packet bookkeeping kept beside the flow FIFO.
struct PacketMeta {
  std::uint64_t seq = 0;  // arrival order at the leaf
  double r_tag = 0.0;
  double s_tag = 0.0;
};

struct FlowState {
  FlowConfig cfg;
  std::uint32_t leaf = 0;  // node index
  std::deque<Packet> fifo;
  std::deque<PacketMeta> meta;

  // f.rank for pFabric and LQF; kNoRank while empty.
  std::uint64_t rank = kNoRank;
  // Nondecreasing suffix minima of queued pFabric ranks.
  std::deque<std::uint64_t> rank_minima;

  // hClock virtual times: r and l in ns, s in bytes per unit share.
  double r_rank = 0.0;
  double l_rank = 0.0;
  double s_rank = 0.0;

  // Start-time fair queueing tags, bytes per unit share.
  double start_tag = 0.0;
  double finish_tag = 0.0;

  // Per-flow shaping.
  TimeNs last_ts = 0;
  double rate_Bps = 0.0;  // min of max and pacing rate, 0 = unshaped

  // Membership in the leaf's queues.
  Handle h_main;
  Handle h_aux;
  enum class Slot : std::uint8_t { none, main, eligible, limited } slot = Slot::none;

  std::uint64_t in_system = 0;  // accepted but not yet dequeued from the tree
  std::uint64_t delivered_packets = 0;
  std::uint64_t delivered_bytes = 0;

  [[nodiscard]] std::size_t len() const noexcept { return fifo.size(); }
};

}  // namespace eiffel
