#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eiffel/bench/bench.hpp"
#include "eiffel/errors.hpp"
#include "eiffel/sched/policy_tree.hpp"
#include "eiffel/sim/sim.hpp"
#include "eiffel/sim/workload.hpp"

namespace {

using nlohmann::json;
using namespace eiffel;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

// Writes to path, or stdout for "" and "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot write '" + path + "'");
    }
  }
  std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct BenchArgs {
  std::vector<std::string> queues{"cffs"};
  std::vector<std::size_t> buckets{10000};
  std::vector<double> pkts_per_bucket;
  std::vector<double> occupancy;
  unsigned repetitions = 10;
  unsigned warmup = 3;
  std::uint64_t seed = 1;
  unsigned error_probes = 10;
  bool no_pin = false;
  std::string config;
  std::string out;
};

int run_bench_cmd(const BenchArgs& a) {
  json file = json::object();
  if (!a.config.empty()) file = read_json(a.config);
  if (!file.is_object()) throw ConfigError("bench config must be a JSON object");

  std::vector<bench::FillMode> modes;
  std::vector<double> values;
  if (!a.occupancy.empty()) {
    for (double v : a.occupancy) {
      modes.push_back(bench::FillMode::occupancy);
      values.push_back(v);
    }
  } else {
    for (double v : a.pkts_per_bucket.empty() ? std::vector<double>{1.0} : a.pkts_per_bucket) {
      modes.push_back(bench::FillMode::pkts_per_bucket);
      values.push_back(v);
    }
  }

  std::vector<bench::BenchConfig> runs;
  for (const std::string& q : a.queues) {
    for (std::size_t n : a.buckets) {
      for (std::size_t i = 0; i < modes.size(); ++i) {
        bench::BenchConfig c;
        c.queue = bench::parse_bench_queue(q);
        c.num_buckets = n;
        c.fill_mode = modes[i];
        c.fill_value = values[i];
        c.repetitions = a.repetitions;
        c.warmup = a.warmup;
        c.seed = a.seed;
        c.error_probes = a.error_probes;
        c.pin = !a.no_pin;
        runs.push_back(bench::bench_config_from_json(file, c));
      }
    }
  }

  Output out(a.out);
  bench::write_bench_header(out.get());
  for (const auto& c : runs) {
    bench::write_bench_row(out.get(), bench::run_bench(c));
    out.get().flush();
  }
  return kOk;
}

struct SweepArgs {
  unsigned alpha = kDefaultAlpha;
  std::vector<double> occupancy;
  unsigned seeds = 10;
  unsigned probes = 20;
  bool no_presets = false;
  std::string rounding = "nearest";
  std::string config;
  std::string out;
  std::string hist;
};

int run_sweep_cmd(const SweepArgs& a) {
  bench::SweepConfig c;
  c.alpha = a.alpha;
  if (!a.occupancy.empty()) c.occupancies = a.occupancy;
  c.seeds = a.seeds;
  c.probes = a.probes;
  c.presets = !a.no_presets;
  std::string rounding = a.rounding;
  if (!a.config.empty()) {
    const json j = read_json(a.config);
    if (!j.is_object()) throw ConfigError("sweep config must be a JSON object");
    try {
      if (j.contains("alpha")) c.alpha = j.at("alpha").get<unsigned>();
      if (j.contains("occupancies")) c.occupancies = j.at("occupancies").get<std::vector<double>>();
      if (j.contains("seeds")) c.seeds = j.at("seeds").get<unsigned>();
      if (j.contains("probes")) c.probes = j.at("probes").get<unsigned>();
      if (j.contains("presets")) c.presets = j.at("presets").get<bool>();
      if (j.contains("rounding")) rounding = j.at("rounding").get<std::string>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("sweep config: ") + e.what());
    }
  }
  if (rounding == "nearest") {
    c.rounding = EstimatorRounding::nearest;
  } else if (rounding == "ceil") {
    c.rounding = EstimatorRounding::ceil;
  } else {
    throw ConfigError("rounding must be nearest or ceil");
  }
  const auto rows = bench::run_error_sweep(c);
  Output out(a.out);
  bench::write_sweep_csv(out.get(), rows);
  if (!a.hist.empty()) {
    Output h(a.hist);
    bench::write_sweep_hist_csv(h.get(), rows);
  }
  return kOk;
}

struct SimArgs {
  std::string policy;
  std::string workload;
  std::optional<double> duration_ms;
  std::optional<std::uint64_t> seed;
  std::optional<double> link_bps;
  std::string trace;
  std::string stages;
  std::string out;
};

int run_sim_cmd(const SimArgs& a) {
  const PolicyTree tree = load_policy_tree(a.policy);
  json wj = sim::workload_to_json(sim::Workload{});
  if (a.duration_ms) {
    wj.erase("duration_ns");
    wj["duration_ms"] = *a.duration_ms;
  }
  if (a.seed) wj["seed"] = *a.seed;
  if (a.link_bps) wj["link_bps"] = *a.link_bps;
  wj["flows"] = json::array();
  if (!a.workload.empty()) {
    const json file = read_json(a.workload);
    if (!file.is_object()) throw ConfigError("workload must be a JSON object");
    if (file.contains("duration_ms") || file.contains("duration_ns")) {
      wj.erase("duration_ms");
      wj.erase("duration_ns");
    }
    wj.update(file);
  }
  if (!a.trace.empty()) wj["trace"] = true;
  if (!a.stages.empty()) wj["stages"] = true;
  const sim::Workload w = sim::workload_from_json(wj);
  const sim::SimMetrics m = sim::run_sim(tree, w);

  if (!a.trace.empty()) {
    Output t(a.trace);
    sim::write_trace_jsonl(t.get(), m.trace);
  }
  if (!a.stages.empty()) {
    Output s(a.stages);
    for (const auto& r : m.stages) {
      s.get() << json{{"time", r.time}, {"ts", r.ts}, {"stage", r.stage}, {"flow", r.flow}, {"size", r.size}}.dump()
              << '\n';
    }
  }

  json summary = {{"duration_ns", m.duration_ns},   {"packets_in", m.packets_in},
                  {"packets_out", m.packets_out},   {"queued_at_end", m.queued_at_end},
                  {"deferred", m.deferred},         {"peak_flow_backlog", m.peak_flow_backlog},
                  {"aggregate_bps", m.aggregate_bps}, {"conserved", m.conserved()}};
  summary["flows"] = json::array();
  for (const auto& f : m.flows) {
    const double max_window_bps = static_cast<double>(sim::max_window_bytes(f.departures, f.sizes, w.window_ns)) *
                                  8.0 / (static_cast<double>(w.window_ns) / 1e9);
    summary["flows"].push_back({{"id", f.id},
                                {"packets", f.packets},
                                {"bytes", f.bytes},
                                {"throughput_bps", f.throughput_bps},
                                {"max_window_bps", max_window_bps}});
  }
  if (!m.rank_error.empty()) {
    json re = json::object();
    for (const auto& [e, n] : m.rank_error) re[std::to_string(e)] = n;
    summary["rank_error"] = re;
  }
  Output out(a.out);
  out.get() << summary.dump(2) << '\n';
  return kOk;
}

struct GuideArgs {
  std::size_t levels = 0;
  std::string range = "any";
  std::string occupancy = "any";
  bool as_json = false;
};

int run_guide_cmd(const GuideArgs& a) {
  const auto r = bench::select_queue_guide(a.levels, bench::parse_range_kind(a.range),
                                           bench::parse_occupancy(a.occupancy));
  if (a.as_json) {
    std::cout << json{{"queue", r.queue}, {"advice", r.advice}}.dump() << '\n';
  } else {
    std::cout << r.queue << ": " << r.advice << '\n';
  }
  return kOk;
}

struct PlotArgs {
  std::string csv;
  std::string out;
  bench::PlotOptions opts;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bucketed priority queues and a programmable packet scheduler: benchmarks and simulation"};
  app.require_subcommand(1);

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Pre-fill a queue, time a full drain, print CSV rows");
  bench_cmd->add_option("--queue", ba.queues, "cffs|approx|bh|heap|tw (repeatable)")->delimiter(',');
  bench_cmd->add_option("--buckets", ba.buckets, "Bucket count (repeatable)")->delimiter(',');
  auto* ppb = bench_cmd->add_option("--pkts-per-bucket", ba.pkts_per_bucket, "Average packets per bucket")
                  ->delimiter(',');
  auto* occ = bench_cmd->add_option("--occupancy", ba.occupancy, "Ratio of nonempty buckets")->delimiter(',');
  ppb->excludes(occ);
  bench_cmd->add_option("--repetitions", ba.repetitions, "Timed drains per row");
  bench_cmd->add_option("--warmup", ba.warmup, "Untimed drains first (>= 3)");
  bench_cmd->add_option("--seed", ba.seed);
  bench_cmd->add_option("--error-probes", ba.error_probes, "Fill-and-drain runs behind the approx error columns");
  bench_cmd->add_flag("--no-pin", ba.no_pin, "Do not pin to the current CPU");
  bench_cmd->add_option("--config", ba.config, "JSON file; its keys override flags");
  bench_cmd->add_option("-o,--out", ba.out, "CSV path (default stdout)");

  SweepArgs sa;
  auto* sweep_cmd = app.add_subcommand("error-sweep", "Approximate-queue fetch error against occupancy");
  sweep_cmd->add_option("--alpha", sa.alpha);
  sweep_cmd->add_option("--occupancy", sa.occupancy, "Occupancy grid")->delimiter(',');
  sweep_cmd->add_option("--seeds", sa.seeds);
  sweep_cmd->add_option("--probes", sa.probes, "Random fill-and-drain runs per occupancy and seed");
  sweep_cmd->add_flag("--no-presets", sa.no_presets);
  sweep_cmd->add_option("--rounding", sa.rounding, "nearest|ceil");
  sweep_cmd->add_option("--config", sa.config, "JSON file; its keys override flags");
  sweep_cmd->add_option("-o,--out", sa.out, "CSV path (default stdout)");
  sweep_cmd->add_option("--hist", sa.hist, "Error histogram CSV path");

  SimArgs ma;
  auto* sim_cmd = app.add_subcommand("sim", "Run a policy tree against a workload");
  sim_cmd->add_option("--policy", ma.policy, "Policy tree JSON")->required();
  sim_cmd->add_option("--workload", ma.workload, "Workload JSON; its keys override flags");
  sim_cmd->add_option("--duration-ms", ma.duration_ms);
  sim_cmd->add_option("--seed", ma.seed);
  sim_cmd->add_option("--link-bps", ma.link_bps);
  sim_cmd->add_option("--trace", ma.trace, "JSONL trace of enqueues and dequeues");
  sim_cmd->add_option("--stages", ma.stages, "JSONL shaper stage releases");
  sim_cmd->add_option("-o,--out", ma.out, "Summary JSON path (default stdout)");

  GuideArgs ga;
  auto* guide_cmd = app.add_subcommand("guide", "Recommend a priority queue");
  guide_cmd->add_option("--levels", ga.levels, "Number of priority levels")->required();
  guide_cmd->add_option("--range", ga.range, "any|fixed|moving");
  guide_cmd->add_option("--occupancy", ga.occupancy, "any|sparse|dense or a ratio");
  guide_cmd->add_flag("--json", ga.as_json);

  PlotArgs pa;
  auto* plot_cmd = app.add_subcommand("plot", "Render a bench or error-sweep CSV as SVG");
  plot_cmd->add_option("csv", pa.csv, "Input CSV")->required();
  plot_cmd->add_option("-o,--out", pa.out, "SVG path (default: input with .svg)");
  plot_cmd->add_option("--x", pa.opts.x);
  plot_cmd->add_option("--y", pa.opts.y, "Metric column (repeatable, one panel each)")->delimiter(',');
  plot_cmd->add_option("--series", pa.opts.series);
  plot_cmd->add_option("--title", pa.opts.title);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*bench_cmd) return run_bench_cmd(ba);
    if (*sweep_cmd) return run_sweep_cmd(sa);
    if (*sim_cmd) return run_sim_cmd(ma);
    if (*guide_cmd) return run_guide_cmd(ga);
    if (*plot_cmd) {
      std::string out = pa.out;
      if (out.empty()) {
        const auto dot = pa.csv.rfind('.');
        out = (dot == std::string::npos ? pa.csv : pa.csv.substr(0, dot)) + ".svg";
      }
      bench::emit_plot(pa.csv, out, pa.opts);
      std::cout << out << '\n';
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
