#include "eiffel/sched/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eiffel/errors.hpp"

namespace eiffel {

Rank LeafPolicy::quantize(const RankQueue& q, double tag, double granularity) {
  const double scaled = std::floor(tag / granularity);
  const Rank raw = scaled <= 0.0 ? 0 : static_cast<Rank>(scaled);
  const Rank r = q.clamp(raw);
  if (r != raw) ++counters_.clamped_ranks;
  return r;
}

Rank lqf_rank(std::size_t len, std::size_t num_buckets) noexcept {
  const std::size_t top = num_buckets - 1;
  return static_cast<Rank>(top - std::min(len, top));
}

namespace {

// Policies that keep each active flow in one queue under one rank.
class SingleQueueLeaf : public LeafPolicy {
 public:
  SingleQueueLeaf(std::vector<FlowState>& flows, const NodeConfig& cfg)
      : LeafPolicy(flows, cfg), q_(make_rank_queue(cfg.queue)) {}

  [[nodiscard]] bool ready() const override { return !q_->empty(); }

  std::uint32_t select(TimeNs, std::optional<std::uint32_t> forced) override {
    std::uint32_t f;
    if (forced) {
      f = *forced;
      q_->remove(flows_[f].h_main);
    } else {
      f = q_->pop_min()->id;
    }
    flows_[f].slot = FlowState::Slot::none;
    return f;
  }

  [[nodiscard]] std::uint64_t flow_rank(std::uint32_t f) const override {
    return f < keys_.size() && flows_[f].slot == FlowState::Slot::main ? keys_[f] : kNoRank;
  }

 protected:
  void insert(std::uint32_t f, Rank key) {
    FlowState& fl = flows_[f];
    fl.h_main = q_->push(key, f);
    fl.slot = FlowState::Slot::main;
    if (keys_.size() <= f) keys_.resize(f + 1, 0);
    keys_[f] = key;
  }

  // Moves a queued flow to a new rank; a no-op when the bucket is unchanged.
  void reposition(std::uint32_t f, Rank key) {
    if (keys_[f] == key) return;
    q_->remove(flows_[f].h_main);
    ++counters_.repositions;
    insert(f, key);
  }

  std::unique_ptr<RankQueue> q_;
  std::vector<Rank> keys_;
};

class FifoLeaf final : public SingleQueueLeaf {
 public:
  using SingleQueueLeaf::SingleQueueLeaf;

  void on_arrival(std::uint32_t f, TimeNs) override {
    if (flows_[f].len() == 1) insert(f, q_->clamp(flows_[f].meta.front().seq));
  }

  void on_service(std::uint32_t f, const Packet&, const PacketMeta&, TimeNs) override {
    if (!flows_[f].fifo.empty()) insert(f, q_->clamp(flows_[f].meta.front().seq));
  }
};

// Start-time fair queueing over flows.
class FairLeaf final : public SingleQueueLeaf {
 public:
  FairLeaf(std::vector<FlowState>& flows, const NodeConfig& cfg)
      : SingleQueueLeaf(flows, cfg), g_(cfg.granularity > 0 ? cfg.granularity : 1.0) {}

  void on_arrival(std::uint32_t f, TimeNs) override {
    FlowState& fl = flows_[f];
    if (fl.len() != 1) return;
    fl.start_tag = std::max(vtime_, fl.finish_tag);
    insert(f, quantize(*q_, fl.start_tag, g_));
  }

  void on_service(std::uint32_t f, const Packet& p, const PacketMeta&, TimeNs) override {
    FlowState& fl = flows_[f];
    vtime_ = fl.start_tag;
    fl.finish_tag = fl.start_tag + static_cast<double>(p.size) / fl.cfg.share;
    if (fl.fifo.empty()) return;
    fl.start_tag = fl.finish_tag;
    insert(f, quantize(*q_, fl.start_tag, g_));
  }

 private:
  double g_;
  double vtime_ = 0.0;
};

class LqfLeaf final : public SingleQueueLeaf {
 public:
  LqfLeaf(std::vector<FlowState>& flows, const NodeConfig& cfg) : SingleQueueLeaf(flows, cfg) {
    if (cfg.queue.kind == QueueKind::cffs || cfg.queue.kind == QueueKind::approx) {
      throw ConfigError("lqf ranks move in both directions; node '" + cfg.id + "' needs hffs, bh or heap");
    }
  }

  void on_arrival(std::uint32_t f, TimeNs) override {
    FlowState& fl = flows_[f];
    fl.rank = fl.len();
    const Rank key = lqf_rank(fl.len(), cfg_.queue.num_buckets);
    if (fl.len() == 1) {
      insert(f, key);
    } else {
      reposition(f, key);
    }
  }

  void on_service(std::uint32_t f, const Packet&, const PacketMeta&, TimeNs) override {
    FlowState& fl = flows_[f];
    fl.rank = fl.fifo.empty() ? kNoRank : fl.len();
    if (!fl.fifo.empty()) insert(f, lqf_rank(fl.len(), cfg_.queue.num_buckets));
  }
};

class PfabricLeaf final : public SingleQueueLeaf {
 public:
  PfabricLeaf(std::vector<FlowState>& flows, const NodeConfig& cfg)
      : SingleQueueLeaf(flows, cfg), g_(cfg.granularity > 0 ? cfg.granularity : 1.0) {
    if (cfg.queue.kind == QueueKind::cffs || cfg.queue.kind == QueueKind::approx) {
      throw ConfigError("pfabric ranks move in both directions; node '" + cfg.id + "' needs hffs, bh or heap");
    }
  }

  void on_arrival(std::uint32_t f, TimeNs) override {
    FlowState& fl = flows_[f];
    const std::uint64_t pr = fl.fifo.back().rank;
    while (!fl.rank_minima.empty() && fl.rank_minima.back() > pr) fl.rank_minima.pop_back();
    fl.rank_minima.push_back(pr);
    const bool was_idle = fl.len() == 1;
    fl.rank = was_idle ? pr : std::min(pr, fl.rank);
    if (was_idle) {
      insert(f, key(fl.rank));
    } else {
      reposition(f, key(fl.rank));
    }
  }

  void on_service(std::uint32_t f, const Packet& p, const PacketMeta&, TimeNs) override {
    FlowState& fl = flows_[f];
    if (!fl.rank_minima.empty() && fl.rank_minima.front() == p.rank) fl.rank_minima.pop_front();
    if (fl.fifo.empty()) {
      fl.rank = kNoRank;
      fl.rank_minima.clear();
      return;
    }
    fl.rank = cfg_.pfabric_rule == PfabricRule::front ? std::min(p.rank, fl.fifo.front().rank)
                                                      : fl.rank_minima.front();
    insert(f, key(fl.rank));
  }

 private:
  Rank key(std::uint64_t rank) { return quantize(*q_, static_cast<double>(rank), g_); }

  double g_;
};

// Three-queue hClock leaf: flows whose limit tag has passed sit in both the
// reservation queue (keyed by the front packet's r tag) and the share queue
// (front s tag); flows held back by their limit wait in the limit queue.
class HclockLeaf final : public LeafPolicy {
 public:
  HclockLeaf(std::vector<FlowState>& flows, const NodeConfig& cfg)
      : LeafPolicy(flows, cfg),
        g_(cfg.granularity > 0 ? cfg.granularity : 1000.0),
        rq_(make_rank_queue(cfg.queue)),
        sq_(make_rank_queue(cfg.queue)),
        lq_(make_rank_queue(cfg.queue)) {}

  void on_arrival(std::uint32_t f, TimeNs now) override {
    FlowState& fl = flows_[f];
    const auto& cfg = fl.cfg;
    const double size = fl.fifo.back().size;
    PacketMeta& m = fl.meta.back();
    if (cfg.reservation_bps > 0) {
      fl.r_rank = std::max(fl.r_rank, static_cast<double>(now)) + size * kNsPerSec / bps_to_Bps(cfg.reservation_bps);
      m.r_tag = fl.r_rank;
    } else {
      m.r_tag = std::numeric_limits<double>::infinity();
    }
    if (fl.len() == 1) fl.s_rank = std::max(fl.s_rank, share_vtime());
    fl.s_rank += size / cfg.share;
    m.s_tag = fl.s_rank;
    if (fl.len() == 1) place(f, now);
  }

  [[nodiscard]] bool ready() const override { return !sq_->empty(); }

  std::uint32_t select(TimeNs now, std::optional<std::uint32_t> forced) override {
    std::uint32_t f;
    if (forced) {
      f = *forced;
      sq_->remove(flows_[f].h_aux);
      if (flows_[f].h_main.valid()) rq_->remove(flows_[f].h_main);
    } else if (!rq_->empty() && *rq_->min_rank() * g_ <= static_cast<double>(now)) {
      f = rq_->pop_min()->id;
      sq_->remove(flows_[f].h_aux);
      ++reservation_picks_;
    } else {
      f = sq_->pop_min()->id;
      if (flows_[f].h_main.valid()) rq_->remove(flows_[f].h_main);
    }
    FlowState& fl = flows_[f];
    fl.h_main = Handle{};
    fl.h_aux = Handle{};
    fl.slot = FlowState::Slot::none;
    return f;
  }

  void on_service(std::uint32_t f, const Packet& p, const PacketMeta& m, TimeNs now) override {
    FlowState& fl = flows_[f];
    last_served_s_ = std::max(last_served_s_, m.s_tag - static_cast<double>(p.size) / fl.cfg.share);
    if (fl.cfg.limit_bps > 0) {
      fl.l_rank = std::max(fl.l_rank, static_cast<double>(now)) +
                  static_cast<double>(p.size) * kNsPerSec / bps_to_Bps(fl.cfg.limit_bps);
    }
    if (!fl.fifo.empty()) place(f, now);
  }

  [[nodiscard]] std::optional<TimeNs> next_wakeup() const override {
    const auto m = lq_->min_rank();
    if (!m) return std::nullopt;
    return static_cast<TimeNs>(static_cast<double>(*m) * g_);
  }

  std::size_t promote(TimeNs now) override {
    std::size_t n = 0;
    while (!lq_->empty() && static_cast<double>(*lq_->min_rank()) * g_ <= static_cast<double>(now)) {
      const std::uint32_t f = lq_->pop_min()->id;
      flows_[f].slot = FlowState::Slot::none;
      make_eligible(f);
      ++n;
    }
    return n;
  }

  [[nodiscard]] std::uint64_t flow_rank(std::uint32_t f) const override {
    const FlowState& fl = flows_[f];
    return fl.meta.empty() ? kNoRank : static_cast<std::uint64_t>(fl.meta.front().s_tag);
  }

  [[nodiscard]] std::uint64_t reservation_picks() const noexcept { return reservation_picks_; }

 private:
  // Share virtual time for a flow turning active: start tag of the last
  // packet served.
  [[nodiscard]] double share_vtime() const { return last_served_s_; }

  void place(std::uint32_t f, TimeNs now) {
    FlowState& fl = flows_[f];
    if (fl.cfg.limit_bps > 0 && fl.l_rank > static_cast<double>(now)) {
      fl.h_main = lq_->push(ceil_key(*lq_, fl.l_rank), f);
      fl.h_aux = Handle{};
      fl.slot = FlowState::Slot::limited;
      return;
    }
    make_eligible(f);
  }

  void make_eligible(std::uint32_t f) {
    FlowState& fl = flows_[f];
    const PacketMeta& m = fl.meta.front();
    fl.h_main = std::isinf(m.r_tag) ? Handle{} : rq_->push(ceil_key(*rq_, m.r_tag), f);
    fl.h_aux = sq_->push(quantize(*sq_, m.s_tag, 1.0), f);
    fl.slot = FlowState::Slot::eligible;
  }

  Rank ceil_key(const RankQueue& q, double t) {
    const double scaled = std::ceil(t / g_);
    const Rank raw = scaled <= 0.0 ? 0 : static_cast<Rank>(scaled);
    const Rank r = q.clamp(raw);
    if (r != raw) ++counters_.clamped_ranks;
    return r;
  }

  double g_;
  std::unique_ptr<RankQueue> rq_;
  std::unique_ptr<RankQueue> sq_;
  std::unique_ptr<RankQueue> lq_;
  double last_served_s_ = 0.0;
  std::uint64_t reservation_picks_ = 0;
};

}  // namespace

std::unique_ptr<LeafPolicy> make_leaf_policy(std::vector<FlowState>& flows, const NodeConfig& cfg) {
  switch (cfg.policy) {
    case Policy::fifo:
      return std::make_unique<FifoLeaf>(flows, cfg);
    case Policy::fair:
      return std::make_unique<FairLeaf>(flows, cfg);
    case Policy::lqf:
      return std::make_unique<LqfLeaf>(flows, cfg);
    case Policy::pfabric:
      return std::make_unique<PfabricLeaf>(flows, cfg);
    case Policy::hclock:
      return std::make_unique<HclockLeaf>(flows, cfg);
  }
  throw ConfigError("unknown leaf policy");
}

}  // namespace eiffel
