#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "eiffel/link_pool.hpp"
#include "eiffel/occupancy_bitmap.hpp"

namespace eiffel {

// A fixed array of FIFO buckets whose occupancy is tracked by a hierarchical
// FFS bitmap. Bucket i's bit is set iff bucket i is nonempty.
//
// Windows are the building block shared by the flat and circular queues; they
// own bucket heads and occupancy metadata but not the nodes themselves.
class HffsWindow {
 public:
  explicit HffsWindow(std::size_t num_buckets) : buckets_(num_buckets), bitmap_(num_buckets) {}

  [[nodiscard]] std::size_t num_buckets() const noexcept { return buckets_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return count_; }
  [[nodiscard]] bool empty() const noexcept { return count_ == 0; }

  void push(LinkPool& pool, NodeId id, std::size_t bucket) noexcept {
    BucketList& list = buckets_[bucket];
    const bool was_empty = list.empty();
    pool.append(list, id);
    pool[id].bucket = static_cast<std::uint32_t>(bucket);
    if (was_empty) bitmap_.set(bucket);
    ++count_;
  }

  void erase(LinkPool& pool, NodeId id) noexcept {
    const std::size_t b = pool[id].bucket;
    BucketList& list = buckets_[b];
    pool.unlink(list, id);
    if (list.empty()) bitmap_.clear(b);
    --count_;
  }

  NodeId pop_front(LinkPool& pool, std::size_t bucket) noexcept {
    BucketList& list = buckets_[bucket];
    const NodeId id = pool.pop_front(list);
    if (list.empty()) bitmap_.clear(bucket);
    --count_;
    return id;
  }

  [[nodiscard]] std::optional<std::size_t> min_bucket() noexcept { return bitmap_.first(); }
  [[nodiscard]] std::optional<std::size_t> peek_min_bucket() const noexcept { return bitmap_.first(); }

  [[nodiscard]] const BucketList& bucket(std::size_t b) const { return buckets_[b]; }
  [[nodiscard]] const OccupancyBitmap& bitmap() const noexcept { return bitmap_; }

 private:
  std::vector<BucketList> buckets_;
  OccupancyBitmap bitmap_;
  std::size_t count_ = 0;
};

}  // namespace eiffel
