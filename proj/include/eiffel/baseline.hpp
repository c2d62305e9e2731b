#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eiffel/bucket_queue.hpp"
#include "eiffel/errors.hpp"
#include "eiffel/link_pool.hpp"

namespace eiffel {

// Bucket window that keeps the indices of nonempty buckets in a binary
// min-heap (the "BH" baseline). Emptied buckets are removed eagerly through
// a position index, so the heap holds exactly the nonempty buckets.
class HeapIndexWindow {
 public:
  explicit HeapIndexWindow(std::size_t num_buckets) : buckets_(num_buckets), pos_(num_buckets, kAbsent) {
    heap_.reserve(num_buckets);
  }

  [[nodiscard]] std::size_t num_buckets() const noexcept { return buckets_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return count_; }
  [[nodiscard]] bool empty() const noexcept { return count_ == 0; }

  void push(LinkPool& pool, NodeId id, std::size_t bucket) {
    BucketList& list = buckets_[bucket];
    const bool was_empty = list.empty();
    pool.append(list, id);
    pool[id].bucket = static_cast<std::uint32_t>(bucket);
    if (was_empty) heap_insert(static_cast<std::uint32_t>(bucket));
    ++count_;
  }

  void erase(LinkPool& pool, NodeId id) {
    const std::size_t b = pool[id].bucket;
    BucketList& list = buckets_[b];
    pool.unlink(list, id);
    if (list.empty()) heap_erase(static_cast<std::uint32_t>(b));
    --count_;
  }

  NodeId pop_front(LinkPool& pool, std::size_t bucket) {
    BucketList& list = buckets_[bucket];
    const NodeId id = pool.pop_front(list);
    if (list.empty()) heap_erase(static_cast<std::uint32_t>(bucket));
    --count_;
    return id;
  }

  [[nodiscard]] std::optional<std::size_t> min_bucket() const noexcept { return peek_min_bucket(); }
  [[nodiscard]] std::optional<std::size_t> peek_min_bucket() const noexcept {
    if (heap_.empty()) return std::nullopt;
    return heap_.front();
  }

  [[nodiscard]] const BucketList& bucket(std::size_t b) const { return buckets_[b]; }

  // Heap holds exactly the nonempty buckets, each once, in heap order.
  [[nodiscard]] bool consistent() const {
    std::size_t nonempty = 0;
    for (std::size_t b = 0; b < buckets_.size(); ++b) {
      if (buckets_[b].empty()) {
        if (pos_[b] != kAbsent) return false;
      } else {
        ++nonempty;
        if (pos_[b] == kAbsent || heap_[pos_[b]] != b) return false;
      }
    }
    for (std::size_t i = 1; i < heap_.size(); ++i) {
      if (heap_[(i - 1) / 2] > heap_[i]) return false;
    }
    return nonempty == heap_.size();
  }

 private:
  static constexpr std::uint32_t kAbsent = 0xffffffffU;

  void heap_insert(std::uint32_t b) {
    heap_.push_back(b);
    pos_[b] = static_cast<std::uint32_t>(heap_.size() - 1);
    sift_up(heap_.size() - 1);
  }

  void heap_erase(std::uint32_t b) {
    const std::size_t i = pos_[b];
    pos_[b] = kAbsent;
    const std::uint32_t moved = heap_.back();
    heap_.pop_back();
    if (i == heap_.size()) return;
    heap_[i] = moved;
    pos_[moved] = static_cast<std::uint32_t>(i);
    sift_down(i);
    sift_up(pos_[moved]);
  }

  void sift_up(std::size_t i) {
    const std::uint32_t v = heap_[i];
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (heap_[parent] <= v) break;
      heap_[i] = heap_[parent];
      pos_[heap_[i]] = static_cast<std::uint32_t>(i);
      i = parent;
    }
    heap_[i] = v;
    pos_[v] = static_cast<std::uint32_t>(i);
  }

  void sift_down(std::size_t i) {
    const std::size_t n = heap_.size();
    const std::uint32_t v = heap_[i];
    for (;;) {
      std::size_t child = 2 * i + 1;
      if (child >= n) break;
      if (child + 1 < n && heap_[child + 1] < heap_[child]) ++child;
      if (heap_[child] >= v) break;
      heap_[i] = heap_[child];
      pos_[heap_[i]] = static_cast<std::uint32_t>(i);
      i = child;
    }
    heap_[i] = v;
    pos_[v] = static_cast<std::uint32_t>(i);
  }

  std::vector<BucketList> buckets_;
  std::vector<std::uint32_t> heap_;
  std::vector<std::uint32_t> pos_;
  std::size_t count_ = 0;
};

template <class T>
class BhQueue : public BucketQueue<T, HeapIndexWindow> {
 public:
  explicit BhQueue(std::size_t num_buckets) : BucketQueue<T, HeapIndexWindow>(HeapIndexWindow(num_buckets)) {}
};

// Comparison-based binary min-heap keyed by (rank, insertion order), with
// removable handles. Ranks are unbounded.
template <class T>
class BinaryHeapQueue {
 public:
  [[nodiscard]] std::size_t size() const noexcept { return heap_.size(); }
  [[nodiscard]] bool empty() const noexcept { return heap_.empty(); }

  Handle insert(Rank rank, T item) {
    const NodeId id = pool_.acquire(rank);
    if (id >= values_.size()) {
      values_.resize(id + 1);
      pos_.resize(id + 1);
    }
    values_[id] = std::move(item);
    heap_.push_back(Entry{rank, seq_++, id});
    sift_up(heap_.size() - 1);
    return pool_.handle_of(id);
  }

  std::optional<Popped<T>> pop_min() {
    if (heap_.empty()) return std::nullopt;
    const Entry top = heap_.front();
    erase_at(0);
    Popped<T> out{top.rank, std::move(values_[top.id])};
    pool_.release(top.id);
    return out;
  }

  [[nodiscard]] std::optional<Rank> min_rank() const noexcept {
    if (heap_.empty()) return std::nullopt;
    return heap_.front().rank;
  }

  T remove(Handle h) {
    const NodeId id = pool_.resolve(h);
    erase_at(pos_[id]);
    T out = std::move(values_[id]);
    pool_.release(id);
    return out;
  }

  [[nodiscard]] bool contains(Handle h) const noexcept {
    return h.slot < pool_.slots() && pool_[h.slot].live && pool_[h.slot].generation == h.generation;
  }

 private:
  struct Entry {
    Rank rank;
    std::uint64_t seq;
    NodeId id;
    [[nodiscard]] bool before(const Entry& o) const noexcept {
      return rank != o.rank ? rank < o.rank : seq < o.seq;
    }
  };

  void erase_at(std::size_t i) {
    const Entry last = heap_.back();
    heap_.pop_back();
    if (i == heap_.size()) return;
    heap_[i] = last;
    pos_[last.id] = i;
    sift_down(i);
    sift_up(pos_[last.id]);
  }

  void sift_up(std::size_t i) {
    const Entry v = heap_[i];
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!v.before(heap_[parent])) break;
      heap_[i] = heap_[parent];
      pos_[heap_[i].id] = i;
      i = parent;
    }
    heap_[i] = v;
    pos_[v.id] = i;
  }

  void sift_down(std::size_t i) {
    const std::size_t n = heap_.size();
    const Entry v = heap_[i];
    for (;;) {
      std::size_t child = 2 * i + 1;
      if (child >= n) break;
      if (child + 1 < n && heap_[child + 1].before(heap_[child])) ++child;
      if (!heap_[child].before(v)) break;
      heap_[i] = heap_[child];
      pos_[heap_[i].id] = i;
      i = child;
    }
    heap_[i] = v;
    pos_[v.id] = i;
  }

  LinkPool pool_;
  std::vector<T> values_;
  std::vector<std::size_t> pos_;
  std::vector<Entry> heap_;
  std::uint64_t seq_ = 0;
};

// Timing wheel: slot array over a fixed horizon, released in slot order as
// the cursor passes. Only time-based, non-work-conserving release.
template <class T>
class TimingWheel {
 public:
  using TimeNs = std::uint64_t;

  TimingWheel(TimeNs granularity_ns, std::size_t num_slots)
      : granularity_(granularity_ns), slots_(num_slots) {
    if (granularity_ns == 0 || num_slots == 0) throw ConfigError("timing wheel needs slots and granularity");
  }

  [[nodiscard]] TimeNs granularity() const noexcept { return granularity_; }
  [[nodiscard]] std::size_t num_slots() const noexcept { return slots_.size(); }
  [[nodiscard]] TimeNs horizon() const noexcept { return granularity_ * slots_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return count_; }
  [[nodiscard]] bool empty() const noexcept { return count_ == 0; }
  // Absolute slot number the next advance() releases first.
  [[nodiscard]] std::uint64_t cursor() const noexcept { return cursor_; }

  // Timestamps whose slot has already been passed leave on the next advance().
  void insert(TimeNs ts, T item) {
    const std::uint64_t slot = ts / granularity_;
    if (slot < cursor_) {
      overdue_.push_back(std::move(item));
      ++count_;
      return;
    }
    if (slot - cursor_ >= slots_.size()) {
      throw HorizonError("timestamp " + std::to_string(ts) + " beyond wheel horizon");
    }
    slots_[slot % slots_.size()].push_back(std::move(item));
    ++count_;
  }

  // Releases every slot up to and including now / granularity.
  std::vector<T> advance(TimeNs now) {
    std::vector<T> out;
    for (auto& item : overdue_) out.push_back(std::move(item));
    count_ -= overdue_.size();
    overdue_.clear();
    const std::uint64_t target = now / granularity_;
    if (target < cursor_) return out;
    const std::uint64_t span = std::min<std::uint64_t>(target - cursor_ + 1, slots_.size());
    for (std::uint64_t k = 0; k < span; ++k) {
      auto& slot = slots_[(cursor_ + k) % slots_.size()];
      for (auto& item : slot) out.push_back(std::move(item));
      count_ -= slot.size();
      slot.clear();
    }
    cursor_ = target + 1;
    return out;
  }

 private:
  TimeNs granularity_;
  std::vector<std::deque<T>> slots_;
  std::vector<T> overdue_;
  std::uint64_t cursor_ = 0;
  std::size_t count_ = 0;
};

}  // namespace eiffel
