#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "eiffel/gradient.hpp"

namespace eiffel::bench {

enum class BenchQueue { cffs, approx, bh, heap, tw };
enum class FillMode { pkts_per_bucket, occupancy };

[[nodiscard]] std::string_view to_string(BenchQueue q) noexcept;
[[nodiscard]] std::string_view to_string(FillMode m) noexcept;
[[nodiscard]] BenchQueue parse_bench_queue(std::string_view name);
[[nodiscard]] FillMode parse_fill_mode(std::string_view name);

struct BenchConfig {
  BenchQueue queue = BenchQueue::cffs;
  std::size_t num_buckets = 10000;
  FillMode fill_mode = FillMode::pkts_per_bucket;
  double fill_value = 1.0;
  unsigned repetitions = 10;
  unsigned warmup = 3;
  std::uint64_t seed = 1;
  unsigned error_probes = 10;  // fill-and-drain runs behind the approx error columns
  bool pin = true;

  void validate() const;
};

// Keys: queue, buckets, pkts_per_bucket | occupancy, repetitions, warmup,
// seed, error_probes, pin. Keys absent from j keep the values of base.
[[nodiscard]] BenchConfig bench_config_from_json(const nlohmann::json& j, BenchConfig base = {});

struct BenchResult {
  BenchConfig config;
  std::size_t items = 0;
  double mops = 0.0;  // median over timed repetitions
  double mops_min = 0.0;
  double mops_max = 0.0;
  double mean_abs_err = 0.0;
  long long p99_abs_err = 0;
  double mean_search_len = 0.0;
  std::uint64_t digest = 0;  // hash of the drained rank sequence
};

// Ranks the pre-fill inserts, in insertion order. Deterministic in seed.
[[nodiscard]] std::vector<std::uint64_t> fill_ranks(const BenchConfig& cfg, std::uint64_t seed);

// Pre-fill then drain with wall-clock timing. Throws ConfigError.
[[nodiscard]] BenchResult run_bench(const BenchConfig& cfg);

// Untimed drain of the pre-fill; popped ranks in order.
[[nodiscard]] std::vector<std::uint64_t> drain_sequence(const BenchConfig& cfg);

[[nodiscard]] const std::vector<std::string>& bench_csv_columns();
void write_bench_header(std::ostream& out);
void write_bench_row(std::ostream& out, const BenchResult& r);

enum class Pattern { random, even_spacing, half_full_plus_outlier, all_full };

[[nodiscard]] std::string_view to_string(Pattern p) noexcept;

// Occupied internal indices of a named pattern over [i0, imax].
[[nodiscard]] std::vector<std::size_t> preset_indices(Pattern p, const ApproxRange& range);

struct SweepConfig {
  unsigned alpha = kDefaultAlpha;
  std::vector<double> occupancies = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  unsigned seeds = 10;
  unsigned probes = 20;  // random fill-and-drain runs per (occupancy, seed)
  bool presets = true;
  EstimatorRounding rounding = EstimatorRounding::nearest;

  void validate() const;
};

// Random rows fill a fresh queue per probe and drain it, recording every
// fetch. Preset rows record the single fetch from the pattern itself.
// Errors are signed, in bucket units, found - true.
struct SweepRow {
  unsigned alpha = 0;
  Pattern pattern = Pattern::random;
  double occupancy = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  double mean_abs_err = 0.0;
  long long p99_abs_err = 0;
  double mean_err = 0.0;
  double mean_abs_est_err = 0.0;
  double hit_rate = 0.0;
  double mean_search_len = 0.0;
  std::map<long long, std::uint64_t> fetch_hist;
  std::map<long long, std::uint64_t> estimate_hist;
};

[[nodiscard]] std::vector<SweepRow> run_error_sweep(const SweepConfig& cfg);

// Mean of mean_abs_err over the random rows at each occupancy.
[[nodiscard]] std::map<double, double> sweep_curve(const std::vector<SweepRow>& rows);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
// Long format: pattern, occupancy, seed, kind (fetch|estimate), error, count.
void write_sweep_hist_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct PlotOptions {
  std::string x;                // default: fill_value or occupancy
  std::vector<std::string> y;   // one panel each; default per schema
  std::string series;           // default: queue or pattern
  std::string title;
};

// Renders a CSV written by this module as an SVG line chart. Points sharing
// (series, x) are averaged. Throws ConfigError on unreadable or malformed
// input.
void emit_plot(const std::string& csv_path, const std::string& svg_path, const PlotOptions& opts = {});

enum class RangeKind { any, fixed, moving };
enum class Occupancy { any, sparse, dense };

[[nodiscard]] RangeKind parse_range_kind(std::string_view s);
[[nodiscard]] Occupancy parse_occupancy(std::string_view s);

struct Recommendation {
  std::string queue;   // heap | hffs | cffs | approx
  std::string advice;
};

inline constexpr std::size_t kComparisonQueueLevels = 1000;

[[nodiscard]] Recommendation select_queue_guide(std::size_t levels, RangeKind range, Occupancy occupancy);

}  // namespace eiffel::bench
