#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "eiffel/bench/bench.hpp"
#include "eiffel/errors.hpp"
#include "eiffel/rank_queue.hpp"
#include "eiffel/sim/sim.hpp"

namespace py = pybind11;
using namespace eiffel;

namespace {

nlohmann::json parse_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

class PyQueue {
 public:
  PyQueue(const std::string& kind, std::size_t buckets) : q_(make_rank_queue({parse_queue_kind(kind), buckets})) {}

  void push(Rank rank, std::uint32_t id) { (void)q_->push(rank, id); }

  std::optional<std::pair<Rank, std::uint32_t>> pop() {
    auto e = q_->pop_min();
    if (!e) return std::nullopt;
    return std::make_pair(e->rank, e->id);
  }

  std::optional<Rank> peek() const { return q_->min_rank(); }
  std::size_t size() const { return q_->size(); }

 private:
  std::unique_ptr<RankQueue> q_;
};

py::dict run_bench_row(const std::string& queue, std::size_t buckets, std::optional<double> occupancy,
               std::optional<double> pkts_per_bucket, unsigned repetitions, std::uint64_t seed) {
  bench::BenchConfig c;
  c.queue = bench::parse_bench_queue(queue);
  c.num_buckets = buckets;
  if (occupancy && pkts_per_bucket) throw ConfigError("give either pkts_per_bucket or occupancy, not both");
  if (occupancy) {
    c.fill_mode = bench::FillMode::occupancy;
    c.fill_value = *occupancy;
  } else if (pkts_per_bucket) {
    c.fill_value = *pkts_per_bucket;
  }
  c.repetitions = repetitions;
  c.seed = seed;
  c.pin = false;
  const bench::BenchResult r = bench::run_bench(c);
  py::dict d;
  d["queue"] = std::string(bench::to_string(c.queue));
  d["buckets"] = c.num_buckets;
  d["fill_mode"] = std::string(bench::to_string(c.fill_mode));
  d["fill_value"] = c.fill_value;
  d["seed"] = c.seed;
  d["mops"] = r.mops;
  d["mops_min"] = r.mops_min;
  d["mops_max"] = r.mops_max;
  d["mean_abs_err"] = r.mean_abs_err;
  d["p99_abs_err"] = r.p99_abs_err;
  d["mean_search_len"] = r.mean_search_len;
  d["items"] = r.items;
  return d;
}

std::map<double, double> error_curve(unsigned alpha, std::vector<double> occupancies, unsigned seeds,
                                     unsigned probes) {
  bench::SweepConfig c;
  c.alpha = alpha;
  c.occupancies = std::move(occupancies);
  c.seeds = seeds;
  c.probes = probes;
  c.presets = false;
  return bench::sweep_curve(bench::run_error_sweep(c));
}

py::dict simulate(const std::string& tree_json, const std::string& workload_json, bool trace) {
  const PolicyTree tree = policy_tree_from_json(parse_json(tree_json));
  sim::Workload w = sim::workload_from_json(parse_json(workload_json));
  w.record_trace = trace;
  const sim::SimMetrics m = sim::run_sim(tree, w);
  py::dict d;
  d["packets_in"] = m.packets_in;
  d["packets_out"] = m.packets_out;
  d["queued_at_end"] = m.queued_at_end;
  d["conserved"] = m.conserved();
  d["aggregate_bps"] = m.aggregate_bps;
  py::dict flows;
  for (const auto& f : m.flows) flows[py::int_(f.id)] = f.throughput_bps;
  d["throughput_bps"] = flows;
  d["order"] = m.order;
  if (trace) {
    std::ostringstream out;
    sim::write_trace_jsonl(out, m.trace);
    d["trace_jsonl"] = out.str();
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(eiffel_sched, m) {
  m.doc() = "Bucketed priority queues and a packet scheduling simulator.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<RangeError>(m, "RangeError", PyExc_IndexError);

  py::class_<PyQueue>(m, "Queue")
      .def(py::init<const std::string&, std::size_t>(), py::arg("kind") = "cffs", py::arg("buckets") = 1024)
      .def("push", &PyQueue::push, py::arg("rank"), py::arg("id"))
      .def("pop", &PyQueue::pop, "Pop the (rank, id) pair with the smallest rank, or None.")
      .def("peek", &PyQueue::peek)
      .def("__len__", &PyQueue::size);

  m.def("bench", &run_bench_row, py::arg("queue"), py::arg("buckets") = 10000, py::arg("occupancy") = py::none(),
        py::arg("pkts_per_bucket") = py::none(), py::arg("repetitions") = 5, py::arg("seed") = 1,
        "Fill and drain one queue; returns a row of the bench CSV as a dict.");
  m.def("error_curve", &error_curve, py::arg("alpha") = kDefaultAlpha,
        py::arg("occupancies") = std::vector<double>{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0},
        py::arg("seeds") = 10, py::arg("probes") = 20, "Mean absolute fetch error by occupancy.");
  m.def(
      "guide",
      [](std::size_t levels, const std::string& range, const std::string& occupancy) {
        const auto r = bench::select_queue_guide(levels, bench::parse_range_kind(range),
                                                 bench::parse_occupancy(occupancy));
        return std::make_pair(r.queue, r.advice);
      },
      py::arg("levels"), py::arg("range") = "any", py::arg("occupancy") = "any");
  m.def("simulate", &simulate, py::arg("tree_json"), py::arg("workload_json"), py::arg("trace") = false);
}
