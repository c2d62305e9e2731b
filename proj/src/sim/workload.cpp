#include "eiffel/sim/workload.hpp"

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "eiffel/errors.hpp"

namespace eiffel::sim {

using nlohmann::json;

std::uint32_t SizeDist::draw(std::mt19937_64& rng) const {
  switch (kind) {
    case SizeKind::fixed:
      return bytes;
    case SizeKind::mtu:
      return 1500;
    case SizeKind::mixed: {
      const auto r = rng() % 10;
      return r < 5 ? 64 : (r < 6 ? 576 : 1500);
    }
  }
  return 1500;
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

SizeKind parse_size_kind(const std::string& s) {
  if (s == "fixed") return SizeKind::fixed;
  if (s == "mtu") return SizeKind::mtu;
  if (s == "mixed") return SizeKind::mixed;
  throw ConfigError("unknown packet size kind '" + s + "'");
}

const char* size_kind_name(SizeKind k) {
  switch (k) {
    case SizeKind::fixed:
      return "fixed";
    case SizeKind::mtu:
      return "mtu";
    case SizeKind::mixed:
      return "mixed";
  }
  return "mtu";
}

}  // namespace

Workload workload_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("workload must be a JSON object");
  Workload w;
  try {
    w.seed = get_or<std::uint64_t>(j, "seed", w.seed);
    if (j.contains("duration_ns")) {
      w.duration_ns = j.at("duration_ns").get<TimeNs>();
    } else if (j.contains("duration_ms")) {
      w.duration_ns = static_cast<TimeNs>(j.at("duration_ms").get<double>() * 1e6);
    }
    w.link_bps = get_or<double>(j, "link_bps", w.link_bps);
    if (const auto s = j.find("packet_size"); s != j.end()) {
      w.sizes.kind = parse_size_kind(get_or<std::string>(*s, "kind", "mtu"));
      w.sizes.bytes = get_or<std::uint32_t>(*s, "bytes", w.sizes.bytes);
    }
    w.per_flow_cap = get_or<std::size_t>(j, "per_flow_cap", w.per_flow_cap);
    w.batch_bytes = get_or<std::uint32_t>(j, "batch_bytes", w.batch_bytes);
    if (j.contains("window_ms")) w.window_ns = static_cast<TimeNs>(j.at("window_ms").get<double>() * 1e6);
    w.rank_unit_bytes = get_or<std::uint32_t>(j, "rank_unit_bytes", w.rank_unit_bytes);
    w.record_trace = get_or<bool>(j, "trace", false);
    w.record_stages = get_or<bool>(j, "stages", false);
    if (const auto fs = j.find("flows"); fs != j.end()) {
      for (const json& f : *fs) {
        FlowWorkload fw;
        fw.id = f.at("id").get<FlowId>();
        const std::string a = get_or<std::string>(f, "arrival", "backlogged");
        if (a == "backlogged") {
          fw.arrival = ArrivalKind::backlogged;
        } else if (a == "poisson") {
          fw.arrival = ArrivalKind::poisson;
        } else {
          throw ConfigError("unknown arrival '" + a + "'");
        }
        fw.rate_bps = get_or<double>(f, "rate_bps", 0.0);
        fw.flow_bytes = get_or<std::uint64_t>(f, "flow_bytes", 0);
        w.flows.push_back(fw);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("workload: ") + e.what());
  }
  if (!(w.link_bps > 0.0)) throw ConfigError("link_bps must be positive");
  if (w.sizes.kind == SizeKind::fixed && w.sizes.bytes == 0) throw ConfigError("fixed packet size must be positive");
  if (w.per_flow_cap == 0) throw ConfigError("per_flow_cap must be positive");
  if (w.window_ns == 0) throw ConfigError("window must be positive");
  if (w.rank_unit_bytes == 0) throw ConfigError("rank_unit_bytes must be positive");
  for (const FlowWorkload& f : w.flows) {
    if (f.arrival == ArrivalKind::poisson && !(f.rate_bps > 0.0)) {
      throw ConfigError("poisson flow " + std::to_string(f.id) + " needs rate_bps");
    }
  }
  return w;
}

json workload_to_json(const Workload& w) {
  json j = {{"seed", w.seed},
            {"duration_ns", w.duration_ns},
            {"link_bps", w.link_bps},
            {"packet_size", {{"kind", size_kind_name(w.sizes.kind)}, {"bytes", w.sizes.bytes}}},
            {"per_flow_cap", w.per_flow_cap},
            {"batch_bytes", w.batch_bytes},
            {"window_ms", static_cast<double>(w.window_ns) / 1e6},
            {"rank_unit_bytes", w.rank_unit_bytes},
            {"trace", w.record_trace},
            {"stages", w.record_stages}};
  j["flows"] = json::array();
  for (const FlowWorkload& f : w.flows) {
    j["flows"].push_back({{"id", f.id},
                          {"arrival", f.arrival == ArrivalKind::poisson ? "poisson" : "backlogged"},
                          {"rate_bps", f.rate_bps},
                          {"flow_bytes", f.flow_bytes}});
  }
  return j;
}

Workload load_workload(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open workload '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("workload '" + path + "': " + e.what());
  }
  return workload_from_json(j);
}

}  // namespace eiffel::sim
