#include "eiffel/sim/sim.hpp"

#include <algorithm>
#include <optional>
#include <random>

#include <nlohmann/json.hpp>

#include "eiffel/errors.hpp"
#include "eiffel/sched/scheduler.hpp"

namespace eiffel::sim {

const FlowMetrics& SimMetrics::flow(FlowId id) const {
  for (const FlowMetrics& f : flows) {
    if (f.id == id) return f;
  }
  throw ConfigError("no metrics for flow " + std::to_string(id));
}

namespace {

double mean_size(const SizeDist& d) {
  switch (d.kind) {
    case SizeKind::fixed:
      return d.bytes;
    case SizeKind::mtu:
      return 1500.0;
    case SizeKind::mixed:
      return 0.5 * 64 + 0.1 * 576 + 0.4 * 1500;
  }
  return 1500.0;
}

struct Generator {
  FlowWorkload w;
  std::mt19937_64 rng;
  std::exponential_distribution<double> gap;
  std::uint64_t sent = 0;
  bool done = false;
  TimeNs next_arrival = 0;
  std::uint64_t pending = 0;
};

class Runner {
 public:
  Runner(const PolicyTree& tree, const Workload& w) : w_(w), sched_(tree) {
    sched_.set_batch_bytes(w.batch_bytes);
    std::vector<FlowWorkload> fws = w.flows;
    if (fws.empty()) {
      for (const FlowConfig& f : tree.flows) fws.push_back(FlowWorkload{f.id, ArrivalKind::backlogged, 0.0, 0});
    }
    for (const FlowWorkload& fw : fws) {
      (void)sched_.flow(fw.id);  // unknown flows are a config error
      std::seed_seq seq{w.seed, static_cast<std::uint64_t>(fw.id), std::uint64_t{0x5eed}};
      Generator g{fw, std::mt19937_64(seq), std::exponential_distribution<double>(1.0), 0, false, 0, 0};
      if (fw.arrival == ArrivalKind::poisson) {
        mean_gap_ns_.push_back(mean_size(w.sizes) * 8.0 * 1e9 / fw.rate_bps);
        g.next_arrival = draw_gap(g, mean_gap_ns_.back());
      } else {
        mean_gap_ns_.push_back(0.0);
      }
      gens_.push_back(std::move(g));
    }
    single_leaf_ = tree.nodes.size() == 1 && tree.nodes[0].policy != Policy::hclock;
    for (const FlowConfig& f : tree.flows) {
      FlowMetrics m;
      m.id = f.id;
      m.window_bps.assign((w.duration_ns + w.window_ns - 1) / w.window_ns, 0.0);
      index_.emplace(f.id, metrics_.flows.size());
      metrics_.flows.push_back(std::move(m));
    }
    if (w.record_stages) {
      sched_.set_stage_observer([this](const StageEvent& e) {
        metrics_.stages.push_back(
            StageRecord{e.time, e.ts, sched_.stage_name(e.stage), e.packet.flow, e.packet.size});
      });
    }
  }

  SimMetrics run() {
    const TimeNs end = w_.duration_ns;
    metrics_.duration_ns = end;
    TimeNs now = 0;
    TimeNs link_free = 0;
    while (now < end) {
      arrivals(now);
      sched_.release(now);
      if (link_free <= now && sched_.has_ready()) {
        const auto snapshot = rank_snapshot();
        auto p = sched_.dequeue(now);
        if (p) {
          depart(*p, now, snapshot);
          link_free = now + transmission_ns(p->size, bps_to_Bps(w_.link_bps));
          top_up(now);
        }
      }

      std::optional<TimeNs> next;
      auto consider = [&](TimeNs t) {
        if (t > now) next = next ? std::min(*next, t) : t;
      };
      if (sched_.has_ready()) consider(std::max(link_free, now + 1));
      if (const auto t = sched_.next_event_time()) consider(std::max(*t, now + 1));
      for (const Generator& g : gens_) {
        if (g.w.arrival == ArrivalKind::poisson && !g.done) consider(std::max(g.next_arrival, now + 1));
      }
      if (!next) break;
      now = *next;
    }

    metrics_.queued_at_end = sched_.backlog();
    const double secs = static_cast<double>(end) / 1e9;
    std::uint64_t total = 0;
    for (FlowMetrics& f : metrics_.flows) {
      total += f.bytes;
      f.throughput_bps = secs > 0 ? static_cast<double>(f.bytes) * 8.0 / secs : 0.0;
      for (double& b : f.window_bps) b = b * 8.0 / (static_cast<double>(w_.window_ns) / 1e9);
    }
    metrics_.aggregate_bps = secs > 0 ? static_cast<double>(total) * 8.0 / secs : 0.0;
    return std::move(metrics_);
  }

 private:
  static TimeNs draw_gap(Generator& g, double mean_ns) {
    return static_cast<TimeNs>(g.gap(g.rng) * mean_ns) + 1;
  }

  void emit(Generator& g, TimeNs now) {
    std::uint32_t size = w_.sizes.draw(g.rng);
    std::uint64_t rank = 0;
    if (g.w.flow_bytes > 0) {
      const std::uint64_t left = g.w.flow_bytes - g.sent;
      size = static_cast<std::uint32_t>(std::min<std::uint64_t>(size, left));
      rank = (left + w_.rank_unit_bytes - 1) / w_.rank_unit_bytes;
    }
    Packet p;
    p.id = next_id_++;
    p.flow = g.w.id;
    p.size = size;
    p.rank = rank;
    sched_.enqueue(p, now);
    ++metrics_.packets_in;
    metrics_.peak_flow_backlog = std::max<std::uint64_t>(metrics_.peak_flow_backlog, sched_.flow_backlog(g.w.id));
    g.sent += size;
    if (g.w.flow_bytes > 0 && g.sent >= g.w.flow_bytes) g.done = true;
    if (w_.record_trace) metrics_.trace.push_back(TraceRecord{now, "enqueue", p.flow, p.id, p.rank});
  }

  bool has_room(const Generator& g) const { return sched_.flow_backlog(g.w.id) < w_.per_flow_cap; }

  void top_up(TimeNs now) {
    for (Generator& g : gens_) {
      if (g.w.arrival == ArrivalKind::backlogged) {
        while (!g.done && has_room(g)) emit(g, now);
      } else {
        while (g.pending > 0 && !g.done && has_room(g)) {
          --g.pending;
          emit(g, now);
        }
      }
    }
  }

  void arrivals(TimeNs now) {
    for (std::size_t i = 0; i < gens_.size(); ++i) {
      Generator& g = gens_[i];
      if (g.w.arrival != ArrivalKind::poisson) continue;
      while (!g.done && g.next_arrival <= now) {
        if (has_room(g) && g.pending == 0) {
          emit(g, now);
        } else {
          ++g.pending;
          ++metrics_.deferred;
        }
        g.next_arrival += draw_gap(g, mean_gap_ns_[i]);
      }
    }
    top_up(now);
  }

  std::vector<std::pair<FlowId, std::uint64_t>> rank_snapshot() const {
    std::vector<std::pair<FlowId, std::uint64_t>> s;
    if (!single_leaf_) return s;
    for (const FlowMetrics& f : metrics_.flows) {
      const std::uint64_t r = sched_.flow_rank(f.id);
      if (r != kNoRank) s.emplace_back(f.id, r);
    }
    return s;
  }

  void depart(const Packet& p, TimeNs now, const std::vector<std::pair<FlowId, std::uint64_t>>& snapshot) {
    ++metrics_.packets_out;
    metrics_.order.push_back(p.id);
    FlowMetrics& f = metrics_.flows[index_.at(p.flow)];
    ++f.packets;
    f.bytes += p.size;
    f.departures.push_back(now);
    f.sizes.push_back(p.size);
    f.window_bps[now / w_.window_ns] += p.size;
    if (w_.record_trace) metrics_.trace.push_back(TraceRecord{now, "dequeue", p.flow, p.id, p.rank});
    if (!snapshot.empty()) {
      std::uint64_t best = kNoRank;
      std::uint64_t served = kNoRank;
      for (const auto& [id, r] : snapshot) {
        best = std::min(best, r);
        if (id == p.flow) served = r;
      }
      if (served != kNoRank) {
        ++metrics_.rank_error[static_cast<std::int64_t>(served) - static_cast<std::int64_t>(best)];
      }
    }
  }

  const Workload& w_;
  Scheduler sched_;
  std::vector<Generator> gens_;
  std::vector<double> mean_gap_ns_;
  std::map<FlowId, std::size_t> index_;
  SimMetrics metrics_;
  std::uint64_t next_id_ = 0;
  bool single_leaf_ = false;
};

}  // namespace

SimMetrics run_sim(const PolicyTree& tree, const Workload& workload) {
  if (workload.duration_ns > 0 && workload.window_ns == 0) throw ConfigError("window must be positive");
  Runner r(tree, workload);
  return r.run();
}

void write_trace_jsonl(std::ostream& out, const std::vector<TraceRecord>& trace) {
  for (const TraceRecord& t : trace) {
    out << nlohmann::json{{"time", t.time}, {"event", t.event}, {"flow", t.flow}, {"packet", t.packet},
                          {"rank", t.rank}}
               .dump()
        << '\n';
  }
}

std::uint64_t max_window_bytes(const std::vector<TimeNs>& times, const std::vector<std::uint32_t>& sizes,
                               TimeNs window) {
  std::uint64_t best = 0;
  std::uint64_t cur = 0;
  std::size_t lo = 0;
  for (std::size_t hi = 0; hi < times.size(); ++hi) {
    cur += sizes[hi];
    while (times[hi] - times[lo] >= window) cur -= sizes[lo++];
    best = std::max(best, cur);
  }
  return best;
}

}  // namespace eiffel::sim
