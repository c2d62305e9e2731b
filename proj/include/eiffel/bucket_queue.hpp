#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eiffel/errors.hpp"
#include "eiffel/hffs_window.hpp"
#include "eiffel/link_pool.hpp"

namespace eiffel {

template <class T>
struct Popped {
  Rank rank;
  T item;
};

// Bucketed integer min-queue over the fixed rank range [0, N). Rank equals
// bucket index; mapping a policy rank onto buckets is the caller's job.
// Items of equal rank leave in FIFO order. The Window decides how the lowest
// nonempty bucket is located (bitmap, heap of indices, gradient estimate).
template <class T, class Window = HffsWindow>
class BucketQueue {
 public:
  explicit BucketQueue(Window window) : window_(std::move(window)) {}

  [[nodiscard]] std::size_t num_buckets() const noexcept { return window_.num_buckets(); }
  [[nodiscard]] std::size_t size() const noexcept { return window_.size(); }
  [[nodiscard]] bool empty() const noexcept { return window_.empty(); }

  Handle insert(Rank rank, T item) {
    if (rank >= window_.num_buckets()) {
      throw RangeError("rank " + std::to_string(rank) + " outside [0, " +
                       std::to_string(window_.num_buckets()) + ")");
    }
    const NodeId id = pool_.acquire(rank);
    if (id >= values_.size()) values_.resize(id + 1);
    values_[id] = std::move(item);
    window_.push(pool_, id, static_cast<std::size_t>(rank));
    return pool_.handle_of(id);
  }

  std::optional<Popped<T>> pop_min() {
    const auto b = window_.min_bucket();
    if (!b) return std::nullopt;
    const NodeId id = window_.pop_front(pool_, *b);
    Popped<T> out{pool_[id].rank, std::move(values_[id])};
    pool_.release(id);
    return out;
  }

  [[nodiscard]] std::optional<Rank> min_rank() const {
    const auto b = window_.peek_min_bucket();
    if (!b) return std::nullopt;
    return static_cast<Rank>(*b);
  }

  T remove(Handle h) {
    const NodeId id = pool_.resolve(h);
    window_.erase(pool_, id);
    T out = std::move(values_[id]);
    pool_.release(id);
    return out;
  }

  [[nodiscard]] bool contains(Handle h) const noexcept {
    return h.slot < pool_.slots() && pool_[h.slot].live && pool_[h.slot].generation == h.generation;
  }

  [[nodiscard]] Rank rank_of(Handle h) const { return pool_[pool_.resolve(h)].rank; }

  // Items of bucket b in FIFO order, for inspection in tests and tools.
  [[nodiscard]] std::vector<T> bucket_items(std::size_t b) const {
    std::vector<T> out;
    for (NodeId id = window_.bucket(b).head; id != kNil; id = pool_[id].next) out.push_back(values_[id]);
    return out;
  }

  [[nodiscard]] Window& window() noexcept { return window_; }
  [[nodiscard]] const Window& window() const noexcept { return window_; }

 private:
  LinkPool pool_;
  std::vector<T> values_;
  Window window_;
};

// Hierarchical FFS-based queue.
template <class T>
class HffsQueue : public BucketQueue<T, HffsWindow> {
 public:
  explicit HffsQueue(std::size_t num_buckets) : BucketQueue<T, HffsWindow>(HffsWindow(num_buckets)) {}

  [[nodiscard]] const OccupancyBitmap& bitmap() const noexcept { return this->window().bitmap(); }
  [[nodiscard]] std::size_t depth() const noexcept { return bitmap().depth(); }
};

}  // namespace eiffel
