#include "eiffel/sched/policy_tree.hpp"

#include <fstream>
#include <map>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "eiffel/errors.hpp"

namespace eiffel {

using nlohmann::json;

std::string_view to_string(Policy p) noexcept {
  switch (p) {
    case Policy::fifo:
      return "fifo";
    case Policy::fair:
      return "fair";
    case Policy::lqf:
      return "lqf";
    case Policy::pfabric:
      return "pfabric";
    case Policy::hclock:
      return "hclock";
  }
  return "?";
}

Policy parse_policy(std::string_view name) {
  for (Policy p : {Policy::fifo, Policy::fair, Policy::lqf, Policy::pfabric, Policy::hclock}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

namespace {

QueueSpec default_queue(Policy p) {
  if (p == Policy::lqf || p == Policy::pfabric) return QueueSpec{QueueKind::hffs, 4096};
  return QueueSpec{QueueKind::cffs, 1024};
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

void check_rate(double v, const std::string& what) {
  if (!(v >= 0.0)) throw ConfigError(what + " must be a non-negative rate");
}

}  // namespace

void PolicyTree::validate() const {
  if (nodes.empty()) throw ConfigError("policy tree has no nodes");
  if (outbox_depth == 0) throw ConfigError("outbox_depth must be at least 1");
  if (shaper.granularity_ns == 0 || shaper.num_buckets == 0) throw ConfigError("shaper needs buckets and granularity");

  std::map<std::string, const NodeConfig*> by_id;
  for (const NodeConfig& n : nodes) {
    if (n.id.empty()) throw ConfigError("node id must be non-empty");
    if (!by_id.emplace(n.id, &n).second) throw ConfigError("duplicate node '" + n.id + "'");
  }

  std::size_t roots = 0;
  std::map<std::string, std::size_t> child_count;
  for (const NodeConfig& n : nodes) {
    if (!(n.share > 0.0)) throw ConfigError("node '" + n.id + "' share must be positive");
    check_rate(n.limit_bps, "node '" + n.id + "' limit");
    if (n.reservation_bps != 0.0) {
      throw ConfigError("node '" + n.id + "': reservations are per flow under an hclock leaf");
    }
    if (n.queue.num_buckets == 0) throw ConfigError("node '" + n.id + "' needs at least one bucket");
    if (!(n.granularity >= 0.0)) throw ConfigError("node '" + n.id + "' granularity must be non-negative");
    if (n.parent.empty()) {
      ++roots;
      continue;
    }
    if (!by_id.count(n.parent)) throw ConfigError("node '" + n.id + "' has unknown parent '" + n.parent + "'");
    ++child_count[n.parent];
  }
  if (roots != 1) throw ConfigError("policy tree needs exactly one root, found " + std::to_string(roots));

  for (const NodeConfig& n : nodes) {
    std::set<std::string> seen;
    for (const NodeConfig* x = &n; !x->parent.empty(); x = by_id.at(x->parent)) {
      if (!seen.insert(x->id).second) throw ConfigError("cycle through node '" + x->id + "'");
    }
    if (child_count.count(n.id) && n.policy != Policy::fair) {
      throw ConfigError("internal node '" + n.id + "' must use fair");
    }
  }

  std::set<FlowId> flow_ids;
  for (const FlowConfig& f : flows) {
    const std::string name = "flow " + std::to_string(f.id);
    if (!flow_ids.insert(f.id).second) throw ConfigError("duplicate " + name);
    const auto it = by_id.find(f.leaf);
    if (it == by_id.end()) throw ConfigError(name + " names unknown leaf '" + f.leaf + "'");
    if (child_count.count(f.leaf)) throw ConfigError(name + " attached to internal node '" + f.leaf + "'");
    if (!(f.share > 0.0)) throw ConfigError(name + " share must be positive");
    check_rate(f.reservation_bps, name + " reservation");
    check_rate(f.limit_bps, name + " limit");
    check_rate(f.max_rate_bps, name + " max_rate");
    check_rate(f.pacing_rate_bps, name + " pacing_rate");
    if (f.limit_bps > 0.0 && f.reservation_bps > f.limit_bps) {
      throw ConfigError(name + " reservation exceeds its limit");
    }
    if ((f.reservation_bps > 0.0 || f.limit_bps > 0.0) && it->second->policy != Policy::hclock) {
      throw ConfigError(name + " has reservation or limit outside an hclock leaf");
    }
  }
}

PolicyTree policy_tree_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("policy tree must be a JSON object");
  PolicyTree t;
  try {
    if (const auto s = j.find("shaper"); s != j.end()) {
      t.shaper.granularity_ns = get_or<TimeNs>(*s, "granularity_ns", t.shaper.granularity_ns);
      t.shaper.num_buckets = get_or<std::size_t>(*s, "num_buckets", t.shaper.num_buckets);
    }
    t.outbox_depth = get_or<std::size_t>(j, "outbox_depth", t.outbox_depth);
    for (const json& n : j.at("nodes")) {
      NodeConfig c;
      c.id = n.at("id").get<std::string>();
      c.parent = get_or<std::string>(n, "parent", "");
      c.policy = parse_policy(get_or<std::string>(n, "policy", "fair"));
      c.share = get_or<double>(n, "share", 1.0);
      c.reservation_bps = get_or<double>(n, "reservation", 0.0);
      c.limit_bps = get_or<double>(n, "limit", 0.0);
      c.queue = default_queue(c.policy);
      if (n.contains("queue_type")) c.queue.kind = parse_queue_kind(n.at("queue_type").get<std::string>());
      c.queue.num_buckets = get_or<std::size_t>(n, "num_buckets", c.queue.num_buckets);
      c.granularity = get_or<double>(n, "granularity", 0.0);
      const std::string rule = get_or<std::string>(n, "pfabric_rule", "min_queued");
      if (rule == "min_queued") {
        c.pfabric_rule = PfabricRule::min_queued;
      } else if (rule == "front") {
        c.pfabric_rule = PfabricRule::front;
      } else {
        throw ConfigError("unknown pfabric_rule '" + rule + "'");
      }
      t.nodes.push_back(std::move(c));
    }
    if (const auto fs = j.find("flows"); fs != j.end()) {
      for (const json& f : *fs) {
        FlowConfig c;
        c.id = f.at("id").get<FlowId>();
        c.leaf = f.at("leaf").get<std::string>();
        c.share = get_or<double>(f, "share", 1.0);
        c.reservation_bps = get_or<double>(f, "reservation", 0.0);
        c.limit_bps = get_or<double>(f, "limit", 0.0);
        c.max_rate_bps = get_or<double>(f, "max_rate", 0.0);
        c.pacing_rate_bps = get_or<double>(f, "pacing_rate", 0.0);
        t.flows.push_back(std::move(c));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("policy tree: ") + e.what());
  }
  t.validate();
  return t;
}

json policy_tree_to_json(const PolicyTree& tree) {
  json j;
  j["shaper"] = {{"granularity_ns", tree.shaper.granularity_ns}, {"num_buckets", tree.shaper.num_buckets}};
  j["outbox_depth"] = tree.outbox_depth;
  j["nodes"] = json::array();
  for (const NodeConfig& n : tree.nodes) {
    json o = {{"id", n.id},
              {"policy", std::string(to_string(n.policy))},
              {"share", n.share},
              {"reservation", n.reservation_bps},
              {"limit", n.limit_bps},
              {"queue_type", std::string(to_string(n.queue.kind))},
              {"num_buckets", n.queue.num_buckets},
              {"granularity", n.granularity},
              {"pfabric_rule", n.pfabric_rule == PfabricRule::front ? "front" : "min_queued"}};
    o["parent"] = n.parent.empty() ? json(nullptr) : json(n.parent);
    j["nodes"].push_back(std::move(o));
  }
  j["flows"] = json::array();
  for (const FlowConfig& f : tree.flows) {
    j["flows"].push_back({{"id", f.id},
                          {"leaf", f.leaf},
                          {"share", f.share},
                          {"reservation", f.reservation_bps},
                          {"limit", f.limit_bps},
                          {"max_rate", f.max_rate_bps},
                          {"pacing_rate", f.pacing_rate_bps}});
  }
  return j;
}

PolicyTree load_policy_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policy tree '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("policy tree '" + path + "': " + e.what());
  }
  return policy_tree_from_json(j);
}

PolicyTree single_leaf_tree(Policy policy, const std::vector<FlowConfig>& flows, QueueSpec queue) {
  PolicyTree t;
  NodeConfig root;
  root.id = "root";
  root.policy = policy;
  root.queue = queue;
  if ((policy == Policy::lqf || policy == Policy::pfabric) &&
      (queue.kind == QueueKind::cffs || queue.kind == QueueKind::approx)) {
    root.queue = default_queue(policy);
  }
  t.nodes.push_back(root);
  for (FlowConfig f : flows) {
    f.leaf = "root";
    t.flows.push_back(f);
  }
  t.validate();
  return t;
}

PolicyTree shaped_hierarchy_tree(const HierarchyRates& rates) {
  PolicyTree t;
  auto node = [&](std::string id, std::string parent, double share, double limit) {
    NodeConfig n;
    n.id = std::move(id);
    n.parent = std::move(parent);
    n.share = share;
    n.limit_bps = limit;
    t.nodes.push_back(std::move(n));
  };
  node("root", "", 1.0, rates.pacing_bps);
  node("A", "root", rates.a_share, 0.0);
  node("B", "root", rates.b_share, rates.b_limit_bps);
  node("B1", "B", rates.b1_share, 0.0);
  node("B2", "B", rates.b2_share, rates.b2_limit_bps);
  for (auto [id, leaf] : {std::pair<FlowId, const char*>{0, "A"}, {1, "B1"}, {2, "B2"}}) {
    FlowConfig f;
    f.id = id;
    f.leaf = leaf;
    t.flows.push_back(f);
  }
  t.validate();
  return t;
}

}  // namespace eiffel
