#include "eiffel/bench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif

#include "eiffel/approx_window.hpp"
#include "eiffel/baseline.hpp"
#include "eiffel/circular_queue.hpp"
#include "eiffel/errors.hpp"

namespace eiffel::bench {

std::string_view to_string(BenchQueue q) noexcept {
  switch (q) {
    case BenchQueue::cffs: return "cffs";
    case BenchQueue::approx: return "approx";
    case BenchQueue::bh: return "bh";
    case BenchQueue::heap: return "heap";
    case BenchQueue::tw: return "tw";
  }
  return "?";
}

std::string_view to_string(FillMode m) noexcept {
  return m == FillMode::occupancy ? "occupancy" : "pkts_per_bucket";
}

BenchQueue parse_bench_queue(std::string_view name) {
  for (BenchQueue q : {BenchQueue::cffs, BenchQueue::approx, BenchQueue::bh, BenchQueue::heap, BenchQueue::tw}) {
    if (to_string(q) == name) return q;
  }
  throw ConfigError("unknown bench queue '" + std::string(name) + "'");
}

FillMode parse_fill_mode(std::string_view name) {
  if (name == "pkts_per_bucket") return FillMode::pkts_per_bucket;
  if (name == "occupancy") return FillMode::occupancy;
  throw ConfigError("unknown fill mode '" + std::string(name) + "'");
}

void BenchConfig::validate() const {
  if (num_buckets < 2) throw ConfigError("bench needs at least two buckets");
  if (repetitions == 0) throw ConfigError("repetitions must be positive");
  if (warmup < 3) throw ConfigError("warmup must be at least 3");
  if (!(fill_value > 0.0) || !std::isfinite(fill_value)) throw ConfigError("fill value must be positive");
  if (fill_mode == FillMode::occupancy && fill_value > 1.0) throw ConfigError("occupancy must be in (0, 1]");
  if (fill_mode == FillMode::pkts_per_bucket && fill_value * static_cast<double>(num_buckets) > 1e8) {
    throw ConfigError("pre-fill larger than 1e8 items");
  }
}

BenchConfig bench_config_from_json(const nlohmann::json& j, BenchConfig base) {
  if (!j.is_object()) throw ConfigError("bench config must be a JSON object");
  BenchConfig c = base;
  try {
    if (j.contains("queue")) c.queue = parse_bench_queue(j.at("queue").get<std::string>());
    if (j.contains("buckets")) c.num_buckets = j.at("buckets").get<std::size_t>();
    const bool ppb = j.contains("pkts_per_bucket");
    const bool occ = j.contains("occupancy");
    if (ppb && occ) throw ConfigError("give either pkts_per_bucket or occupancy, not both");
    if (ppb) {
      c.fill_mode = FillMode::pkts_per_bucket;
      c.fill_value = j.at("pkts_per_bucket").get<double>();
    } else if (occ) {
      c.fill_mode = FillMode::occupancy;
      c.fill_value = j.at("occupancy").get<double>();
    }
    if (j.contains("repetitions")) c.repetitions = j.at("repetitions").get<unsigned>();
    if (j.contains("warmup")) c.warmup = j.at("warmup").get<unsigned>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("error_probes")) c.error_probes = j.at("error_probes").get<unsigned>();
    if (j.contains("pin")) c.pin = j.at("pin").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bench config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<std::uint64_t> fill_ranks(const BenchConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = cfg.num_buckets;
  std::vector<std::uint64_t> out;
  if (cfg.fill_mode == FillMode::occupancy) {
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.fill_value * n)));
    std::vector<std::uint64_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    // partial Fisher-Yates
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng() % (n - i);
      std::swap(all[i], all[j]);
    }
    all.resize(k);
    return all;
  }
  // spread evenly: every bucket gets floor(total / n), a random subset one more
  const auto total = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.fill_value * n)));
  std::vector<std::uint64_t> extra(n);
  std::iota(extra.begin(), extra.end(), 0);
  const std::size_t rem = total % n;
  for (std::size_t i = 0; i < rem; ++i) std::swap(extra[i], extra[i + rng() % (n - i)]);
  out.reserve(total);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t k = 0; k < total / n; ++k) out.push_back(b);
  }
  out.insert(out.end(), extra.begin(), extra.begin() + static_cast<std::ptrdiff_t>(rem));
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

namespace {

inline std::uint64_t mix(std::uint64_t d, std::uint64_t r) { return (d ^ r) * 1099511628211ULL; }
constexpr std::uint64_t kDigestSeed = 14695981039346656037ULL;

struct Drained {
  double secs = 0.0;
  std::uint64_t digest = kDigestSeed;
  std::size_t count = 0;
};

using Clock = std::chrono::steady_clock;

template <class Q>
Drained drain_bucketed(Q& q, const std::vector<std::uint64_t>& ranks) {
  for (std::size_t i = 0; i < ranks.size(); ++i) q.insert(ranks[i], static_cast<std::uint32_t>(i));
  Drained d;
  const auto t0 = Clock::now();
  while (auto p = q.pop_min()) {
    d.digest = mix(d.digest, p->rank);
    ++d.count;
  }
  d.secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return d;
}

Drained drain_wheel(std::size_t n, const std::vector<std::uint64_t>& ranks) {
  TimingWheel<std::uint32_t> tw(1, n);
  for (std::size_t i = 0; i < ranks.size(); ++i) tw.insert(ranks[i], static_cast<std::uint32_t>(i));
  Drained d;
  const auto t0 = Clock::now();
  for (std::uint64_t t = 0; !tw.empty(); ++t) {
    for (std::uint32_t id : tw.advance(t)) {
      d.digest = mix(d.digest, ranks[id]);
      ++d.count;
    }
  }
  d.secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return d;
}

Drained drain_once(const BenchConfig& cfg, const std::vector<std::uint64_t>& ranks) {
  switch (cfg.queue) {
    case BenchQueue::cffs: {
      CffsQueue<std::uint32_t> q(cfg.num_buckets);
      return drain_bucketed(q, ranks);
    }
    case BenchQueue::approx: {
      CircularApproxQueue<std::uint32_t> q(ApproxRange::for_buckets(cfg.num_buckets));
      return drain_bucketed(q, ranks);
    }
    case BenchQueue::bh: {
      BhQueue<std::uint32_t> q(cfg.num_buckets);
      return drain_bucketed(q, ranks);
    }
    case BenchQueue::heap: {
      BinaryHeapQueue<std::uint32_t> q;
      return drain_bucketed(q, ranks);
    }
    case BenchQueue::tw:
      return drain_wheel(cfg.num_buckets, ranks);
  }
  throw ConfigError("unhandled bench queue");
}

void pin_current_thread() {
#if defined(__linux__)
  const int cpu = sched_getcpu();
  if (cpu < 0) return;
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(cpu, &set);
  (void)pthread_setaffinity_np(pthread_self(), sizeof(set), &set);
#endif
}

void merge(ApproxStats& into, const ApproxStats& s) {
  into.lookups += s.lookups;
  into.hits += s.hits;
  into.search_steps += s.search_steps;
  for (const auto& [e, c] : s.estimate_error) into.estimate_error[e] += c;
  for (const auto& [e, c] : s.fetch_error) into.fetch_error[e] += c;
}

double mean_signed(const std::map<long long, std::uint64_t>& hist) {
  std::uint64_t n = 0;
  double sum = 0.0;
  for (const auto& [e, c] : hist) {
    n += c;
    sum += static_cast<double>(e) * static_cast<double>(c);
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

ApproxStats probe_bench_errors(const BenchConfig& cfg) {
  ApproxStats total;
  const ApproxRange range = ApproxRange::for_buckets(cfg.num_buckets);
  for (unsigned p = 0; p < cfg.error_probes; ++p) {
    std::seed_seq seq{cfg.seed, std::uint64_t{p}, std::uint64_t{0xe770}};
    std::mt19937_64 seeder(seq);
    const auto ranks = fill_ranks(cfg, seeder());
    CircularApproxQueue<std::uint32_t> q(range);
    for (std::size_t i = 0; i < ranks.size(); ++i) q.insert(ranks[i], static_cast<std::uint32_t>(i));
    q.primary().track_errors(true);
    q.secondary().track_errors(true);
    while (q.pop_min()) {
    }
    merge(total, q.primary().stats());
    merge(total, q.secondary().stats());
  }
  return total;
}

}  // namespace

BenchResult run_bench(const BenchConfig& cfg) {
  cfg.validate();
  if (cfg.pin) pin_current_thread();
  const auto ranks = fill_ranks(cfg, cfg.seed);
  BenchResult r;
  r.config = cfg;
  r.items = ranks.size();
  for (unsigned i = 0; i < cfg.warmup; ++i) (void)drain_once(cfg, ranks);
  std::vector<double> mops;
  for (unsigned i = 0; i < cfg.repetitions; ++i) {
    const Drained d = drain_once(cfg, ranks);
    if (d.count != ranks.size()) throw std::runtime_error("drain lost items");
    r.digest = d.digest;
    mops.push_back(static_cast<double>(d.count) / std::max(d.secs, 1e-12) / 1e6);
  }
  std::sort(mops.begin(), mops.end());
  const std::size_t m = mops.size();
  r.mops = m % 2 == 1 ? mops[m / 2] : 0.5 * (mops[m / 2 - 1] + mops[m / 2]);
  r.mops_min = mops.front();
  r.mops_max = mops.back();
  if (cfg.queue == BenchQueue::approx && cfg.error_probes > 0) {
    const ApproxStats s = probe_bench_errors(cfg);
    r.mean_abs_err = s.mean_abs_fetch_error();
    r.p99_abs_err = s.p99_abs_fetch_error();
    r.mean_search_len = s.mean_search_len();
  }
  return r;
}

std::vector<std::uint64_t> drain_sequence(const BenchConfig& cfg) {
  cfg.validate();
  const auto ranks = fill_ranks(cfg, cfg.seed);
  std::vector<std::uint64_t> out;
  out.reserve(ranks.size());
  auto collect = [&](auto& q) {
    for (std::size_t i = 0; i < ranks.size(); ++i) q.insert(ranks[i], static_cast<std::uint32_t>(i));
    while (auto p = q.pop_min()) out.push_back(p->rank);
  };
  switch (cfg.queue) {
    case BenchQueue::cffs: {
      CffsQueue<std::uint32_t> q(cfg.num_buckets);
      collect(q);
      break;
    }
    case BenchQueue::approx: {
      CircularApproxQueue<std::uint32_t> q(ApproxRange::for_buckets(cfg.num_buckets));
      collect(q);
      break;
    }
    case BenchQueue::bh: {
      BhQueue<std::uint32_t> q(cfg.num_buckets);
      collect(q);
      break;
    }
    case BenchQueue::heap: {
      BinaryHeapQueue<std::uint32_t> q;
      collect(q);
      break;
    }
    case BenchQueue::tw: {
      TimingWheel<std::uint32_t> tw(1, cfg.num_buckets);
      for (std::size_t i = 0; i < ranks.size(); ++i) tw.insert(ranks[i], static_cast<std::uint32_t>(i));
      for (std::uint64_t t = 0; !tw.empty(); ++t) {
        for (std::uint32_t id : tw.advance(t)) out.push_back(ranks[id]);
      }
      break;
    }
  }
  return out;
}

const std::vector<std::string>& bench_csv_columns() {
  static const std::vector<std::string> cols = {
      "queue",    "buckets",  "fill_mode",    "fill_value",  "seed",        "mops",  "mops_min",
      "mops_max", "mean_abs_err", "p99_abs_err", "mean_search_len", "repetitions", "items", "digest"};
  return cols;
}

void write_bench_header(std::ostream& out) {
  const auto& cols = bench_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

void write_bench_row(std::ostream& out, const BenchResult& r) {
  const BenchConfig& c = r.config;
  out << to_string(c.queue) << ',' << c.num_buckets << ',' << to_string(c.fill_mode) << ',' << c.fill_value << ','
      << c.seed << ',' << r.mops << ',' << r.mops_min << ',' << r.mops_max << ',' << r.mean_abs_err << ','
      << r.p99_abs_err << ',' << r.mean_search_len << ',' << c.repetitions << ',' << r.items << ',' << r.digest
      << '\n';
}

std::string_view to_string(Pattern p) noexcept {
  switch (p) {
    case Pattern::random: return "random";
    case Pattern::even_spacing: return "even-spacing";
    case Pattern::half_full_plus_outlier: return "half-full-plus-outlier";
    case Pattern::all_full: return "all-full";
  }
  return "?";
}

std::vector<std::size_t> preset_indices(Pattern p, const ApproxRange& r) {
  std::vector<std::size_t> out;
  switch (p) {
    case Pattern::all_full:
      for (std::size_t i = r.i0; i <= r.imax; ++i) out.push_back(i);
      break;
    case Pattern::even_spacing:
      for (std::size_t i = r.imax; i >= r.i0; i -= r.alpha) {
        out.push_back(i);
        if (i < r.i0 + r.alpha) break;
      }
      break;
    case Pattern::half_full_plus_outlier:
      for (std::size_t i = r.i0; i <= r.i0 + (r.imax - r.i0) / 2; ++i) out.push_back(i);
      out.push_back(r.i0 + 3 * (r.imax - r.i0) / 4);
      break;
    case Pattern::random:
      throw ConfigError("random is not a preset");
  }
  return out;
}

void SweepConfig::validate() const {
  if (alpha == 0) throw ConfigError("alpha must be positive");
  if (occupancies.empty()) throw ConfigError("occupancy grid is empty");
  for (double o : occupancies) {
    if (!(o > 0.0 && o <= 1.0)) throw ConfigError("occupancy must be in (0, 1]");
  }
  if (seeds == 0 || probes == 0) throw ConfigError("seeds and probes must be positive");
}

namespace {

SweepRow finish_row(const ApproxStats& s, unsigned alpha, Pattern p, double occ, std::uint64_t seed) {
  SweepRow row;
  row.alpha = alpha;
  row.pattern = p;
  row.occupancy = occ;
  row.seed = seed;
  row.samples = s.lookups;
  row.mean_abs_err = s.mean_abs_fetch_error();
  row.p99_abs_err = s.p99_abs_fetch_error();
  row.mean_err = mean_signed(s.fetch_error);
  row.mean_abs_est_err = s.mean_abs_estimate_error();
  row.hit_rate = s.lookups == 0 ? 0.0 : static_cast<double>(s.hits) / static_cast<double>(s.lookups);
  row.mean_search_len = s.mean_search_len();
  row.fetch_hist = s.fetch_error;
  row.estimate_hist = s.estimate_error;
  return row;
}

ApproxStats fetch_once(const ApproxRange& range, EstimatorRounding rounding,
                       const std::vector<std::size_t>& occupied) {
  ApproxGradientQueue<std::uint32_t> q(range, rounding);
  for (std::size_t i : occupied) q.insert(i, 0);
  q.window().track_errors(true);
  (void)q.pop_max();
  return q.window().stats();
}

ApproxStats drain_errors(const ApproxRange& range, EstimatorRounding rounding,
                         const std::vector<std::size_t>& occupied) {
  ApproxGradientQueue<std::uint32_t> q(range, rounding);
  for (std::size_t i : occupied) q.insert(i, 0);
  q.window().track_errors(true);
  while (q.pop_max()) {
  }
  return q.window().stats();
}

}  // namespace

std::vector<SweepRow> run_error_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const ApproxRange range = ApproxRange::make(cfg.alpha);
  std::vector<SweepRow> rows;
  std::vector<std::size_t> all;
  for (std::size_t i = range.i0; i <= range.imax; ++i) all.push_back(i);
  for (double occ : cfg.occupancies) {
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(occ * all.size())));
    for (std::uint64_t seed = 1; seed <= cfg.seeds; ++seed) {
      std::seed_seq seq{seed, static_cast<std::uint64_t>(std::llround(occ * 1e6)), std::uint64_t{0x5bee}};
      std::mt19937_64 rng(seq);
      ApproxStats total;
      std::vector<std::size_t> pick = all;
      for (unsigned p = 0; p < cfg.probes; ++p) {
        for (std::size_t i = 0; i < k; ++i) std::swap(pick[i], pick[i + rng() % (pick.size() - i)]);
        merge(total, drain_errors(range, cfg.rounding, {pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k)}));
      }
      rows.push_back(finish_row(total, cfg.alpha, Pattern::random, occ, seed));
    }
  }
  if (cfg.presets) {
    for (Pattern p : {Pattern::even_spacing, Pattern::half_full_plus_outlier, Pattern::all_full}) {
      const auto idx = preset_indices(p, range);
      const double occ = static_cast<double>(idx.size()) / static_cast<double>(range.num_buckets());
      rows.push_back(finish_row(fetch_once(range, cfg.rounding, idx), cfg.alpha, p, occ, 0));
    }
  }
  return rows;
}

std::map<double, double> sweep_curve(const std::vector<SweepRow>& rows) {
  std::map<double, std::pair<double, unsigned>> acc;
  for (const SweepRow& r : rows) {
    if (r.pattern != Pattern::random) continue;
    auto& [sum, n] = acc[r.occupancy];
    sum += r.mean_abs_err;
    ++n;
  }
  std::map<double, double> out;
  for (const auto& [occ, v] : acc) out[occ] = v.first / v.second;
  return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "alpha,pattern,occupancy,seed,samples,mean_abs_err,p99_abs_err,mean_err,mean_abs_est_err,hit_rate,"
         "mean_search_len\n";
  for (const SweepRow& r : rows) {
    out << r.alpha << ',' << to_string(r.pattern) << ',' << r.occupancy << ',' << r.seed << ',' << r.samples << ','
        << r.mean_abs_err << ',' << r.p99_abs_err << ',' << r.mean_err << ',' << r.mean_abs_est_err << ','
        << r.hit_rate << ',' << r.mean_search_len << '\n';
  }
}

void write_sweep_hist_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "pattern,occupancy,seed,kind,error,count\n";
  for (const SweepRow& r : rows) {
    for (const auto& [e, c] : r.fetch_hist) {
      out << to_string(r.pattern) << ',' << r.occupancy << ',' << r.seed << ",fetch," << e << ',' << c << '\n';
    }
    for (const auto& [e, c] : r.estimate_hist) {
      out << to_string(r.pattern) << ',' << r.occupancy << ',' << r.seed << ",estimate," << e << ',' << c << '\n';
    }
  }
}

RangeKind parse_range_kind(std::string_view s) {
  if (s == "any") return RangeKind::any;
  if (s == "fixed") return RangeKind::fixed;
  if (s == "moving") return RangeKind::moving;
  throw ConfigError("unknown range kind '" + std::string(s) + "'");
}

Occupancy parse_occupancy(std::string_view s) {
  if (s == "any") return Occupancy::any;
  if (s == "sparse") return Occupancy::sparse;
  if (s == "dense") return Occupancy::dense;
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(std::string(s), &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ConfigError("occupancy must be any, sparse, dense or a ratio, got '" + std::string(s) + "'");
  }
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("occupancy ratio must be in [0, 1]");
  // past 30% empty buckets the approximate queue's search cost dominates
  return v >= 0.7 ? Occupancy::dense : Occupancy::sparse;
}

Recommendation select_queue_guide(std::size_t levels, RangeKind range, Occupancy occupancy) {
  if (levels < kComparisonQueueLevels) {
    return {"heap", "comparison queue acceptable: below 1k levels the queue choice barely matters"};
  }
  if (range == RangeKind::fixed) return {"hffs", "hierarchical FFS queue over the fixed range"};
  if (range == RangeKind::moving && occupancy == Occupancy::dense) {
    return {"approx", "approximate gradient queue (circular) for a densely occupied moving range"};
  }
  return {"cffs", "cFFS queue for a moving range"};
}

}  // namespace eiffel::bench
