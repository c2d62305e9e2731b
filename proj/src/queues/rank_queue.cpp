#include "eiffel/rank_queue.hpp"

#include <limits>
#include <string>
#include <utility>

#include "eiffel/approx_window.hpp"
#include "eiffel/baseline.hpp"
#include "eiffel/bucket_queue.hpp"
#include "eiffel/circular_queue.hpp"
#include "eiffel/errors.hpp"

namespace eiffel {
namespace {

constexpr Rank kRankMax = std::numeric_limits<Rank>::max();

template <class Q>
class FixedRangeAdapter final : public RankQueue {
 public:
  explicit FixedRangeAdapter(Q q) : q_(std::move(q)) {}

  Handle push(Rank rank, std::uint32_t id) override { return q_.insert(rank, id); }
  std::optional<RankEntry> pop_min() override {
    auto p = q_.pop_min();
    if (!p) return std::nullopt;
    return RankEntry{p->rank, p->item};
  }
  std::optional<Rank> min_rank() const override { return q_.min_rank(); }
  std::uint32_t remove(Handle h) override { return q_.remove(h); }
  std::size_t size() const override { return q_.size(); }
  Rank floor_rank() const override { return 0; }
  Rank ceiling_rank() const override { return q_.num_buckets() - 1; }

 private:
  Q q_;
};

template <class Q>
class CircularAdapter final : public RankQueue {
 public:
  explicit CircularAdapter(Q q) : q_(std::move(q)) {}

  Handle push(Rank rank, std::uint32_t id) override { return q_.insert(rank, id); }
  std::optional<RankEntry> pop_min() override {
    auto p = q_.pop_min();
    if (!p) return std::nullopt;
    return RankEntry{p->rank, p->item};
  }
  std::optional<Rank> min_rank() const override { return q_.min_rank(); }
  std::uint32_t remove(Handle h) override { return q_.remove(h); }
  std::size_t size() const override { return q_.size(); }
  Rank floor_rank() const override { return q_.h_index(); }
  Rank ceiling_rank() const override { return kRankMax; }

 private:
  Q q_;
};

class HeapAdapter final : public RankQueue {
 public:
  Handle push(Rank rank, std::uint32_t id) override { return q_.insert(rank, id); }
  std::optional<RankEntry> pop_min() override {
    auto p = q_.pop_min();
    if (!p) return std::nullopt;
    return RankEntry{p->rank, p->item};
  }
  std::optional<Rank> min_rank() const override { return q_.min_rank(); }
  std::uint32_t remove(Handle h) override { return q_.remove(h); }
  std::size_t size() const override { return q_.size(); }
  Rank floor_rank() const override { return 0; }
  Rank ceiling_rank() const override { return kRankMax; }

 private:
  BinaryHeapQueue<std::uint32_t> q_;
};

}  // namespace

std::string_view to_string(QueueKind kind) noexcept {
  switch (kind) {
    case QueueKind::hffs: return "hffs";
    case QueueKind::cffs: return "cffs";
    case QueueKind::approx: return "approx";
    case QueueKind::bh: return "bh";
    case QueueKind::heap: return "heap";
  }
  return "?";
}

QueueKind parse_queue_kind(std::string_view name) {
  if (name == "hffs") return QueueKind::hffs;
  if (name == "cffs") return QueueKind::cffs;
  if (name == "approx") return QueueKind::approx;
  if (name == "bh") return QueueKind::bh;
  if (name == "heap") return QueueKind::heap;
  throw ConfigError("unknown queue kind '" + std::string(name) + "'");
}

std::unique_ptr<RankQueue> make_rank_queue(const QueueSpec& spec) {
  if (spec.num_buckets == 0) throw ConfigError("queue needs at least one bucket");
  switch (spec.kind) {
    case QueueKind::hffs:
      return std::make_unique<FixedRangeAdapter<HffsQueue<std::uint32_t>>>(HffsQueue<std::uint32_t>(spec.num_buckets));
    case QueueKind::cffs:
      return std::make_unique<CircularAdapter<CffsQueue<std::uint32_t>>>(CffsQueue<std::uint32_t>(spec.num_buckets));
    case QueueKind::approx:
      return std::make_unique<CircularAdapter<CircularApproxQueue<std::uint32_t>>>(
          CircularApproxQueue<std::uint32_t>(ApproxRange::for_buckets(spec.num_buckets)));
    case QueueKind::bh:
      return std::make_unique<FixedRangeAdapter<BhQueue<std::uint32_t>>>(BhQueue<std::uint32_t>(spec.num_buckets));
    case QueueKind::heap:
      return std::make_unique<HeapAdapter>();
  }
  throw ConfigError("unhandled queue kind");
}

}  // namespace eiffel
