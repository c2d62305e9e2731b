#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "eiffel/circular_queue.hpp"
#include "eiffel/sched/packet.hpp"
#include "eiffel/sched/policy_tree.hpp"

namespace eiffel {

// Where a packet goes when its shaper timestamp is reached.
struct StageRef {
  enum class Kind : std::uint8_t { node, flow };
  Kind kind = Kind::node;
  std::uint32_t index = 0;

  friend bool operator==(const StageRef&, const StageRef&) = default;
};

struct ShaperEntry {
  Packet packet;
  TimeNs ts = 0;
  StageRef next_stage;
};

// One timestamp-keyed cFFS for every rate limit in the tree. Keys are
// ts / granularity; a bucket is released once the clock enters it, so an
// entry may leave up to one granularity before its ts.
class Shaper {
 public:
  explicit Shaper(const ShaperConfig& cfg = {});

  [[nodiscard]] const ShaperConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] std::size_t size() const noexcept { return q_.size(); }
  [[nodiscard]] bool empty() const noexcept { return q_.empty(); }

  // Throws HorizonError when ts lies more than one horizon past now.
  void insert(const Packet& p, TimeNs ts, StageRef next_stage, TimeNs now);

  // Pops every eligible entry, handing each to sink(ShaperEntry&&). Entries
  // the sink inserts are released in the same call if already eligible.
  template <class Sink>
  std::size_t release(TimeNs now, Sink&& sink) {
    std::size_t n = 0;
    const Rank cur = now / cfg_.granularity_ns;
    while (true) {
      const auto m = q_.min_rank();
      if (!m || *m > cur) break;
      auto e = q_.pop_min();
      ++n;
      sink(std::move(e->item));
    }
    return n;
  }

  // Start of the earliest occupied bucket.
  [[nodiscard]] std::optional<TimeNs> next_event_time() const {
    const auto m = q_.min_rank();
    if (!m) return std::nullopt;
    return *m * cfg_.granularity_ns;
  }

 private:
  ShaperConfig cfg_;
  CffsQueue<ShaperEntry> q_;
};

}  // namespace eiffel
