#include "eiffel/sim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <random>

#include "eiffel/errors.hpp"
#include "eiffel/sched/scheduler.hpp"

namespace eiffel::sim {

namespace {

struct Queued {
  std::uint64_t id;
  std::uint64_t rank;
  std::uint64_t seq;
  std::uint32_t size;
};

struct OracleFlow {
  double share = 1.0;
  std::deque<Queued> q;
  std::uint64_t since = 0;  // when the flow's current rank was set
  double key = 0.0;
  double finish = 0.0;
};

}  // namespace

std::vector<std::uint64_t> oracle_order(Policy policy, const std::vector<FlowConfig>& flows,
                                        const std::vector<TraceOp>& ops) {
  if (policy == Policy::hclock) throw ConfigError("no ordering oracle for hclock");
  std::map<FlowId, OracleFlow> st;
  for (const FlowConfig& f : flows) st[f.id].share = f.share;
  std::uint64_t clock = 0;
  std::uint64_t seq = 0;
  double vtime = 0.0;
  std::vector<std::uint64_t> out;

  auto min_rank = [](const OracleFlow& f) {
    std::uint64_t m = std::numeric_limits<std::uint64_t>::max();
    for (const Queued& x : f.q) m = std::min(m, x.rank);
    return m;
  };
  // Key the engine would file the flow under.
  auto rank_of = [&](const OracleFlow& f) -> double {
    switch (policy) {
      case Policy::fifo:
        return static_cast<double>(f.q.front().seq);
      case Policy::fair:
        return std::floor(f.key);
      case Policy::lqf:
        return -static_cast<double>(f.q.size());
      case Policy::pfabric:
        return static_cast<double>(min_rank(f));
      default:
        return 0.0;
    }
  };

  for (const TraceOp& op : ops) {
    ++clock;
    if (!op.dequeue) {
      auto it = st.find(op.packet.flow);
      if (it == st.end()) throw ConfigError("trace names unknown flow");
      OracleFlow& f = it->second;
      const bool idle = f.q.empty();
      const double before = idle ? 0.0 : rank_of(f);
      if (idle && policy == Policy::fair) f.key = std::max(vtime, f.finish);
      f.q.push_back(Queued{op.packet.id, op.packet.rank, seq++, op.packet.size});
      if (idle || rank_of(f) != before) f.since = clock;
      continue;
    }
    OracleFlow* best = nullptr;
    for (auto& [id, f] : st) {
      if (f.q.empty()) continue;
      if (!best || rank_of(f) < rank_of(*best) || (rank_of(f) == rank_of(*best) && f.since < best->since)) {
        best = &f;
      }
    }
    if (!best) continue;
    const Queued served = best->q.front();
    best->q.pop_front();
    out.push_back(served.id);
    if (policy == Policy::fair) {
      vtime = best->key;
      best->finish = best->key + static_cast<double>(served.size) / best->share;
      best->key = best->finish;
    }
    best->since = clock;
  }
  return out;
}

std::vector<std::uint64_t> engine_order(Policy policy, const std::vector<FlowConfig>& flows,
                                        const std::vector<TraceOp>& ops, QueueSpec queue) {
  Scheduler s(single_leaf_tree(policy, flows, queue));
  std::vector<std::uint64_t> out;
  for (const TraceOp& op : ops) {
    if (!op.dequeue) {
      s.enqueue(op.packet, 0);
    } else if (auto p = s.dequeue(0)) {
      out.push_back(p->id);
    }
  }
  return out;
}

std::vector<TraceOp> random_trace(std::uint64_t seed, std::size_t max_flows, std::size_t max_packets) {
  std::mt19937_64 rng(seed);
  const std::size_t nflows = 1 + rng() % max_flows;
  std::vector<std::size_t> left(nflows);
  std::size_t budget = max_packets;
  for (std::size_t f = 0; f < nflows; ++f) {
    const std::size_t cap = std::max<std::size_t>(1, budget / (nflows - f));
    left[f] = 1 + rng() % cap;
    budget -= std::min(budget, left[f]);
  }

  std::vector<TraceOp> ops;
  std::uint64_t id = 0;
  std::size_t queued = 0;
  while (true) {
    std::vector<std::size_t> live;
    for (std::size_t f = 0; f < nflows; ++f) {
      if (left[f] > 0) live.push_back(f);
    }
    if (live.empty()) break;
    if (queued > 0 && rng() % 5 < 2) {
      ops.push_back(TraceOp{true, {}});
      --queued;
      continue;
    }
    const std::size_t f = live[rng() % live.size()];
    Packet p;
    p.id = id++;
    p.flow = static_cast<FlowId>(f);
    p.size = 1500;
    p.rank = left[f];  // remaining packets, this one included
    --left[f];
    ops.push_back(TraceOp{false, p});
    ++queued;
  }
  while (queued-- > 0) ops.push_back(TraceOp{true, {}});
  return ops;
}

}  // namespace eiffel::sim
