#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eiffel/bucket_queue.hpp"
#include "eiffel/errors.hpp"
#include "eiffel/hffs_window.hpp"
#include "eiffel/link_pool.hpp"

namespace eiffel {

// Two bucket windows covering a moving rank range. The primary window covers
// [h_index, h_index + q_size) and the secondary window the next q_size ranks.
// Ranks are absolute and mapped by subtraction. Ranks beyond the secondary
// window wait in the secondary's last bucket, in arrival order, and are
// re-filed when a rotation turns that bucket into the primary's last one.
//
// h_index is always a multiple of q_size.
template <class T, class Window = HffsWindow>
class CircularQueue {
 public:
  explicit CircularQueue(const Window& prototype)
      : windows_{prototype, prototype}, q_(prototype.num_buckets()) {}

  [[nodiscard]] std::size_t q_size() const noexcept { return q_; }
  [[nodiscard]] Rank h_index() const noexcept { return h_; }
  [[nodiscard]] std::size_t size() const noexcept { return count_; }
  [[nodiscard]] bool empty() const noexcept { return count_ == 0; }

  // Rotation and re-file counters.
  [[nodiscard]] std::size_t rotations() const noexcept { return rotations_; }
  [[nodiscard]] std::size_t refiles() const noexcept { return refiles_; }

  Handle insert(Rank rank, T item) {
    if (rank < h_) {
      throw StaleRankError("rank " + std::to_string(rank) + " below window start " + std::to_string(h_));
    }
    if (count_ == 0 && rank - h_ >= 2 * q_) h_ = align(rank);
    const NodeId id = pool_.acquire(rank);
    if (id >= values_.size()) values_.resize(id + 1);
    values_[id] = std::move(item);
    place(id);
    ++count_;
    return pool_.handle_of(id);
  }

  // True when the element was filed into the overflow bucket and is therefore
  // not ordered against its bucket neighbours.
  [[nodiscard]] bool is_overflow(Handle h) const {
    const NodeId id = pool_.resolve(h);
    return pool_[id].rank >= h_ + 2 * q_;
  }

  std::optional<Popped<T>> pop_min() {
    while (count_ > 0) {
      Window& p = windows_[primary_];
      if (p.empty()) {
        advance();
        continue;
      }
      const std::size_t b = *p.min_bucket();
      const NodeId head = p.bucket(b).head;
      p.pop_front(pool_, b);
      --count_;
      Popped<T> out{pool_[head].rank, std::move(values_[head])};
      pool_.release(head);
      return out;
    }
    return std::nullopt;
  }

  // Rank that pop_min() would return, without mutating the queue.
  [[nodiscard]] std::optional<Rank> min_rank() const {
    const Window& p = windows_[primary_];
    const Window& s = windows_[1 - primary_];
    if (!p.empty()) return h_ + *p.peek_min_bucket();
    if (s.empty()) return std::nullopt;
    return window_min(s, h_ + q_);
  }

  T remove(Handle h) {
    const NodeId id = pool_.resolve(h);
    windows_[pool_[id].window].erase(pool_, id);
    --count_;
    T out = std::move(values_[id]);
    pool_.release(id);
    return out;
  }

  [[nodiscard]] bool contains(Handle h) const noexcept {
    return h.slot < pool_.slots() && pool_[h.slot].live && pool_[h.slot].generation == h.generation;
  }

  // Moves an empty queue's window so that it starts at or below r.
  void rebase(Rank r) {
    if (count_ != 0) throw StateError("rebase of a nonempty circular queue");
    h_ = align(r);
  }

  // Swaps the primary and secondary windows and advances h_index by q_size.
  void rotate() {
    if (!windows_[primary_].empty()) throw StateError("rotate with nonempty primary window");
    primary_ = 1 - primary_;
    h_ += q_;
    ++rotations_;
    Window& p = windows_[primary_];
    std::vector<NodeId> spill;
    for (NodeId id = p.bucket(q_ - 1).head; id != kNil; id = pool_[id].next) {
      if (pool_[id].rank >= h_ + q_) spill.push_back(id);
    }
    for (NodeId id : spill) refile(id);
  }

  [[nodiscard]] const Window& primary() const noexcept { return windows_[primary_]; }
  [[nodiscard]] const Window& secondary() const noexcept { return windows_[1 - primary_]; }
  [[nodiscard]] Window& primary() noexcept { return windows_[primary_]; }
  [[nodiscard]] Window& secondary() noexcept { return windows_[1 - primary_]; }

 private:
  [[nodiscard]] Rank align(Rank r) const noexcept { return r - r % q_; }

  void place(NodeId id) {
    const Rank off = pool_[id].rank - h_;
    std::uint8_t w;
    std::size_t b;
    if (off < q_) {
      w = primary_;
      b = static_cast<std::size_t>(off);
    } else {
      w = static_cast<std::uint8_t>(1 - primary_);
      b = off < 2 * q_ ? static_cast<std::size_t>(off - q_) : q_ - 1;
    }
    pool_[id].window = w;
    windows_[w].push(pool_, id, b);
  }

  void refile(NodeId id) {
    windows_[pool_[id].window].erase(pool_, id);
    place(id);
    ++refiles_;
  }

  // Primary is empty and the secondary holds everything.
  void advance() {
    Window& s = windows_[1 - primary_];
    const BucketList& last = s.bucket(q_ - 1);
    std::size_t in_last = 0;
    Rank lowest = std::numeric_limits<Rank>::max();
    for (NodeId id = last.head; id != kNil; id = pool_[id].next) {
      ++in_last;
      lowest = std::min(lowest, pool_[id].rank);
    }
    // Only far-future overflow items remain: jump straight to their window
    // instead of rotating through empty ranges.
    if (in_last == s.size() && lowest >= h_ + 3 * q_) {
      std::vector<NodeId> ids;
      ids.reserve(in_last);
      for (NodeId id = last.head; id != kNil; id = pool_[id].next) ids.push_back(id);
      for (NodeId id : ids) s.erase(pool_, id);
      h_ = align(lowest);
      for (NodeId id : ids) place(id);
      refiles_ += ids.size();
      ++rotations_;
      return;
    }
    rotate();
  }

  [[nodiscard]] Rank min_in_bucket(const Window& w, std::size_t b) const noexcept {
    Rank m = std::numeric_limits<Rank>::max();
    for (NodeId id = w.bucket(b).head; id != kNil; id = pool_[id].next) m = std::min(m, pool_[id].rank);
    return m;
  }

  [[nodiscard]] Rank window_min(const Window& w, Rank base) const noexcept {
    const std::size_t b = *w.peek_min_bucket();
    if (b != q_ - 1) return base + b;
    return min_in_bucket(w, b);
  }

  LinkPool pool_;
  std::vector<T> values_;
  std::array<Window, 2> windows_;
  std::size_t q_;
  std::uint8_t primary_ = 0;
  Rank h_ = 0;
  std::size_t count_ = 0;
  std::size_t rotations_ = 0;
  std::size_t refiles_ = 0;
};

// Circular hierarchical FFS queue (cFFS).
template <class T>
class CffsQueue : public CircularQueue<T, HffsWindow> {
 public:
  explicit CffsQueue(std::size_t q_size) : CircularQueue<T, HffsWindow>(HffsWindow(q_size)) {}
};

}  // namespace eiffel
