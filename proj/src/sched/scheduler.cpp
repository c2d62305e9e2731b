#include "eiffel/sched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "eiffel/errors.hpp"

namespace eiffel {

Scheduler::Scheduler(const PolicyTree& tree) : shaper_(tree.shaper), outbox_depth_(tree.outbox_depth) {
  tree.validate();

  nodes_.resize(tree.nodes.size());
  for (std::uint32_t i = 0; i < tree.nodes.size(); ++i) {
    nodes_[i].cfg = tree.nodes[i];
    node_by_id_.emplace(tree.nodes[i].id, i);
  }
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (n.cfg.parent.empty()) {
      root_ = i;
      continue;
    }
    const std::uint32_t p = node_by_id_.at(n.cfg.parent);
    n.parent = static_cast<int>(p);
    nodes_[p].children.push_back(i);
  }

  flows_.reserve(tree.flows.size());
  for (const FlowConfig& fc : tree.flows) {
    FlowState fl;
    fl.cfg = fc;
    fl.leaf = node_by_id_.at(fc.leaf);
    flow_by_id_.emplace(fc.id, static_cast<std::uint32_t>(flows_.size()));
    flows_.push_back(std::move(fl));
  }
  for (FlowState& fl : flows_) {
    double r = 0.0;
    for (double bps : {fl.cfg.max_rate_bps, fl.cfg.pacing_rate_bps}) {
      if (bps > 0.0) r = r > 0.0 ? std::min(r, bps_to_Bps(bps)) : bps_to_Bps(bps);
    }
    fl.rate_Bps = r;
  }

  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    n.limit_Bps = bps_to_Bps(n.cfg.limit_bps);
    n.granularity = n.cfg.granularity > 0 ? n.cfg.granularity : 1.0;
    if (n.children.empty()) {
      n.leaf = make_leaf_policy(flows_, n.cfg);
    } else {
      n.children_q = make_rank_queue(n.cfg.queue);
    }
  }

  // Paths from the root, kept only while no node on them is gated.
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    std::vector<std::uint32_t> path;
    bool direct = true;
    for (int x = static_cast<int>(i); x >= 0; x = nodes_[x].parent) {
      if (nodes_[x].gated()) direct = false;
      path.push_back(static_cast<std::uint32_t>(x));
    }
    if (!direct) continue;
    std::reverse(path.begin(), path.end());
    nodes_[i].direct_path = std::move(path);
  }
}

std::uint32_t Scheduler::flow_index(FlowId id) const {
  const auto it = flow_by_id_.find(id);
  if (it == flow_by_id_.end()) throw ConfigError("unknown flow " + std::to_string(id));
  return it->second;
}

void Scheduler::enqueue(Packet p, TimeNs now) {
  const std::uint32_t f = flow_index(p.flow);
  if (p.size == 0) throw ConfigError("packet size must be positive");
  FlowState& fl = flows_[f];
  p.enqueue_ts = now;
  if (fl.rate_Bps > 0.0) {
    TimeNs last = fl.last_ts;
    const TimeNs ts = compute_timestamp(last, p.size, fl.rate_Bps, now);
    shaper_.insert(p, ts, StageRef{StageRef::Kind::flow, f}, now);
    fl.last_ts = last;
    ++stats_.shaper_inserts;
  }
  ++fl.in_system;
  ++backlog_;
  ++stats_.enqueued;
  if (fl.rate_Bps <= 0.0) arrive(f, p, now);
}

void Scheduler::arrive(std::uint32_t f, Packet p, TimeNs now) {
  FlowState& fl = flows_[f];
  fl.fifo.push_back(p);
  fl.meta.push_back(PacketMeta{arrival_seq_++, 0.0, 0.0});
  nodes_[fl.leaf].leaf->on_arrival(f, now);
  internal_changed(fl.leaf, now);
}

bool Scheduler::internal_ready(const Node& n) const {
  return n.leaf ? n.leaf->ready() : !n.children_q->empty();
}

bool Scheduler::ready(const Node& n) const { return n.gated() ? !n.outbox.empty() : internal_ready(n); }

void Scheduler::internal_changed(std::uint32_t n, TimeNs now) {
  if (nodes_[n].gated()) {
    pull(n, now);
  } else {
    refresh(n, now);
  }
}

void Scheduler::refresh(std::uint32_t n, TimeNs now) {
  Node& x = nodes_[n];
  if (x.in_service || x.parent < 0) return;
  const auto pi = static_cast<std::uint32_t>(x.parent);
  Node& p = nodes_[pi];
  const bool r = ready(x);
  if (r && !x.queued) {
    x.start_tag = std::max(p.vtime, x.finish_tag);
    x.h = p.children_q->push(child_key(p, x.start_tag), n);
    x.queued = true;
    ++stats_.node_repositions;
    internal_changed(pi, now);
  } else if (!r && x.queued) {
    p.children_q->remove(x.h);
    x.queued = false;
    internal_changed(pi, now);
  }
}

void Scheduler::pull(std::uint32_t n, TimeNs now) {
  Node& g = nodes_[n];
  if (g.inflight || g.outbox.size() >= outbox_depth_ || !internal_ready(g)) return;
  g.inflight = true;
  const Packet p = take_internal(n, now, nullptr, 0);
  const TimeNs ts = compute_timestamp(g.last_ts, p.size, g.limit_Bps, now);
  shaper_.insert(p, ts, StageRef{StageRef::Kind::node, n}, now);
  ++stats_.shaper_inserts;
}

Packet Scheduler::take(std::uint32_t n, TimeNs now, const Forced* forced, std::size_t depth) {
  Node& x = nodes_[n];
  if (!x.gated()) return take_internal(n, now, forced, depth);
  Packet p = x.outbox.front();
  x.outbox.pop_front();
  pull(n, now);
  return p;
}

Packet Scheduler::take_internal(std::uint32_t n, TimeNs now, const Forced* forced, std::size_t depth) {
  Node& x = nodes_[n];
  if (x.leaf) {
    std::optional<std::uint32_t> ff;
    if (forced) ff = forced->flow;
    const std::uint32_t f = x.leaf->select(now, ff);
    FlowState& fl = flows_[f];
    const Packet p = fl.fifo.front();
    fl.fifo.pop_front();
    const PacketMeta m = fl.meta.front();
    fl.meta.pop_front();
    x.leaf->on_service(f, p, m, now);
    return p;
  }

  std::uint32_t c;
  if (forced) {
    c = (*forced->path)[depth + 1];
    x.children_q->remove(nodes_[c].h);
  } else {
    c = x.children_q->pop_min()->id;
  }
  Node& child = nodes_[c];
  child.queued = false;
  child.in_service = true;
  const Packet p = take(c, now, forced, depth + 1);
  x.vtime = child.start_tag;
  child.finish_tag = child.start_tag + static_cast<double>(p.size) / child.cfg.share;
  child.in_service = false;
  refresh(c, now);
  return p;
}

std::optional<Packet> Scheduler::dequeue(TimeNs now) {
  Node& r = nodes_[root_];
  Packet p;
  if (r.gated()) {
    if (r.outbox.empty()) return std::nullopt;
    p = r.outbox.front();
    r.outbox.pop_front();
    pull(root_, now);
  } else {
    if (!internal_ready(r)) return std::nullopt;
    const auto cont = continuation();
    if (cont) ++stats_.batched;
    p = take_internal(root_, now, cont ? &*cont : nullptr, 0);
  }

  const std::uint32_t f = flow_index(p.flow);
  FlowState& fl = flows_[f];
  --fl.in_system;
  --backlog_;
  ++fl.delivered_packets;
  fl.delivered_bytes += p.size;
  ++stats_.dequeued;
  p.release_ts = now;
  if (turn_flow_ == f) {
    turn_bytes_ += p.size;
  } else {
    turn_flow_ = f;
    turn_bytes_ = p.size;
  }
  return p;
}

std::optional<Scheduler::Forced> Scheduler::continuation() const {
  if (batch_bytes_ == 0 || !turn_flow_) return std::nullopt;
  const FlowState& fl = flows_[*turn_flow_];
  const Node& leaf = nodes_[fl.leaf];
  if (!leaf.direct_path || leaf.cfg.policy == Policy::hclock) return std::nullopt;
  if (fl.fifo.empty() || fl.slot != FlowState::Slot::main) return std::nullopt;
  if (turn_bytes_ + fl.fifo.front().size > batch_bytes_) return std::nullopt;
  return Forced{&*leaf.direct_path, *turn_flow_};
}

std::size_t Scheduler::release(TimeNs now) {
  std::size_t total = 0;
  while (true) {
    std::size_t n = shaper_.release(now, [&](ShaperEntry&& e) { on_release(std::move(e), now); });
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
      if (!nodes_[i].leaf) continue;
      if (nodes_[i].leaf->promote(now) > 0) {
        ++n;
        internal_changed(i, now);
      }
    }
    if (n == 0) break;
    total += n;
  }
  return total;
}

void Scheduler::on_release(ShaperEntry&& e, TimeNs now) {
  ++stats_.stage_releases;
  if (observer_) observer_(StageEvent{now, e.ts, e.next_stage, e.packet});
  if (e.next_stage.kind == StageRef::Kind::flow) {
    arrive(e.next_stage.index, e.packet, now);
    return;
  }
  const std::uint32_t n = e.next_stage.index;
  Node& g = nodes_[n];
  g.inflight = false;
  g.outbox.push_back(e.packet);
  pull(n, now);
  refresh(n, now);
}

std::optional<TimeNs> Scheduler::next_event_time() const {
  std::optional<TimeNs> t = shaper_.next_event_time();
  for (const Node& n : nodes_) {
    if (!n.leaf) continue;
    if (const auto w = n.leaf->next_wakeup()) t = t ? std::min(*t, *w) : *w;
  }
  return t;
}

bool Scheduler::has_ready() const { return ready(nodes_[root_]); }

std::size_t Scheduler::flow_backlog(FlowId id) const { return flows_[flow_index(id)].in_system; }

void Scheduler::set_flow_rates(FlowId id, double max_rate_bps, double pacing_rate_bps) {
  FlowState& fl = flows_[flow_index(id)];
  fl.cfg.max_rate_bps = max_rate_bps;
  fl.cfg.pacing_rate_bps = pacing_rate_bps;
  double r = 0.0;
  for (double bps : {max_rate_bps, pacing_rate_bps}) {
    if (bps > 0.0) r = r > 0.0 ? std::min(r, bps_to_Bps(bps)) : bps_to_Bps(bps);
  }
  fl.rate_Bps = r;
}

const FlowState& Scheduler::flow(FlowId id) const { return flows_[flow_index(id)]; }

std::uint64_t Scheduler::flow_rank(FlowId id) const {
  const std::uint32_t f = flow_index(id);
  return nodes_[flows_[f].leaf].leaf->flow_rank(f);
}

std::vector<FlowId> Scheduler::flow_ids() const {
  std::vector<FlowId> ids;
  ids.reserve(flows_.size());
  for (const FlowState& fl : flows_) ids.push_back(fl.cfg.id);
  return ids;
}

std::optional<std::uint32_t> Scheduler::node_index(const std::string& id) const {
  const auto it = node_by_id_.find(id);
  if (it == node_by_id_.end()) return std::nullopt;
  return it->second;
}

const std::string& Scheduler::node_name(std::uint32_t index) const { return nodes_.at(index).cfg.id; }

std::string Scheduler::stage_name(const StageRef& s) const {
  if (s.kind == StageRef::Kind::node) return nodes_.at(s.index).cfg.id;
  return "flow:" + std::to_string(flows_.at(s.index).cfg.id);
}

PolicyCounters Scheduler::policy_counters() const {
  PolicyCounters c;
  for (const Node& n : nodes_) {
    if (!n.leaf) continue;
    c.repositions += n.leaf->counters().repositions;
    c.clamped_ranks += n.leaf->counters().clamped_ranks;
  }
  return c;
}

Rank Scheduler::child_key(const Node& parent, double tag) {
  const double scaled = std::floor(tag / parent.granularity);
  const Rank raw = scaled <= 0.0 ? 0 : static_cast<Rank>(scaled);
  return parent.children_q->clamp(raw);
}

}  // namespace eiffel
