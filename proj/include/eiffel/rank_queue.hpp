#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "eiffel/link_pool.hpp"

namespace eiffel {

enum class QueueKind { hffs, cffs, approx, bh, heap };

[[nodiscard]] std::string_view to_string(QueueKind kind) noexcept;
// Throws ConfigError for unknown names.
[[nodiscard]] QueueKind parse_queue_kind(std::string_view name);

struct QueueSpec {
  QueueKind kind = QueueKind::cffs;
  // Buckets for fixed-range kinds; per-window buckets for circular kinds.
  std::size_t num_buckets = 1024;
};

struct RankEntry {
  Rank rank;
  std::uint32_t id;
};

// Runtime-polymorphic min-queue of small integer ids, used by scheduler
// nodes so each node can pick its own queue implementation.
class RankQueue {
 public:
  virtual ~RankQueue() = default;

  virtual Handle push(Rank rank, std::uint32_t id) = 0;
  virtual std::optional<RankEntry> pop_min() = 0;
  [[nodiscard]] virtual std::optional<Rank> min_rank() const = 0;
  virtual std::uint32_t remove(Handle h) = 0;
  [[nodiscard]] virtual std::size_t size() const = 0;
  // Inclusive bounds on the ranks push() currently accepts.
  [[nodiscard]] virtual Rank floor_rank() const = 0;
  [[nodiscard]] virtual Rank ceiling_rank() const = 0;

  [[nodiscard]] bool empty() const { return size() == 0; }
  [[nodiscard]] Rank clamp(Rank r) const {
    const Rank lo = floor_rank();
    const Rank hi = ceiling_rank();
    return r < lo ? lo : (r > hi ? hi : r);
  }
};

[[nodiscard]] std::unique_ptr<RankQueue> make_rank_queue(const QueueSpec& spec);

}  // namespace eiffel
