#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "eiffel/bucket_queue.hpp"
#include "eiffel/ffs.hpp"
#include "eiffel/circular_queue.hpp"
#include "eiffel/gradient.hpp"
#include "eiffel/link_pool.hpp"
#include "eiffel/occupancy_bitmap.hpp"

namespace eiffel {

// Lookup instrumentation for approximate queues. Errors are in internal
// (max-oriented) index units: estimate error is estimate - true_max, fetch
// error is found - true_max. Error histograms are only filled while exact
// tracking is on.
struct ApproxStats {
  std::uint64_t lookups = 0;
  std::uint64_t hits = 0;
  std::uint64_t search_steps = 0;
  std::map<long long, std::uint64_t> estimate_error;
  std::map<long long, std::uint64_t> fetch_error;

  [[nodiscard]] double mean_abs_fetch_error() const;
  [[nodiscard]] double mean_abs_estimate_error() const;
  [[nodiscard]] long long p99_abs_fetch_error() const;
  [[nodiscard]] double mean_search_len() const;
  void reset() { *this = ApproxStats{}; }
};

// Window over the buckets of one approximate gradient queue. Window bucket w
// is internal index imax - w, so the lowest window bucket is the highest
// internal index and min-queues built on it pop via the max estimate.
//
// A missed estimate scans upward to the highest index ever occupied, then
// downward. Both scans walk the occupancy bitmap a word at a time. Indices below i0 carry permanent weight so that a full
// run [i0, M] estimates M for every M, not just near imax.
class ApproxWindow {
 public:
  struct Lookup {
    std::size_t estimate;
    std::size_t found;
    std::size_t steps;
  };

  explicit ApproxWindow(const ApproxRange& range, EstimatorRounding rounding = EstimatorRounding::nearest)
      : range_(range),
        rounding_(rounding),
        buckets_(range.num_buckets()),
        curvature_(range.alpha, range.imax + 1),
        bits_(range.imax / kWordBits + 1, 0) {
    curvature_.set_floor(range.i0);
  }

  [[nodiscard]] std::size_t num_buckets() const noexcept { return buckets_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return count_; }
  [[nodiscard]] bool empty() const noexcept { return count_ == 0; }

  void push(LinkPool& pool, NodeId id, std::size_t w) {
    BucketList& list = buckets_[w];
    const bool was_empty = list.empty();
    pool.append(list, id);
    pool[id].bucket = static_cast<std::uint32_t>(w);
    if (was_empty) set_occupied(w, true);
    ++count_;
  }

  void erase(LinkPool& pool, NodeId id) {
    const std::size_t w = pool[id].bucket;
    BucketList& list = buckets_[w];
    pool.unlink(list, id);
    if (list.empty()) set_occupied(w, false);
    --count_;
  }

  NodeId pop_front(LinkPool& pool, std::size_t w) {
    BucketList& list = buckets_[w];
    const NodeId id = pool.pop_front(list);
    if (list.empty()) set_occupied(w, false);
    --count_;
    return id;
  }

  // Window bucket of the estimated minimum (highest internal index). Records
  // instrumentation.
  [[nodiscard]] std::optional<std::size_t> min_bucket() {
    const auto hit = find_max();
    if (!hit) return std::nullopt;
    record(*hit);
    return range_.imax - hit->found;
  }

  [[nodiscard]] std::optional<std::size_t> peek_min_bucket() const {
    const auto hit = find_max();
    if (!hit) return std::nullopt;
    return range_.imax - hit->found;
  }

  [[nodiscard]] const BucketList& bucket(std::size_t w) const { return buckets_[w]; }

  [[nodiscard]] std::optional<std::size_t> estimate_max() const {
    return estimate_max_index(curvature_, range_, rounding_);
  }

  [[nodiscard]] std::optional<Lookup> find_max() const {
    const auto est = estimate_max();
    if (!est) return std::nullopt;
    const std::size_t e = *est;
    Lookup out{e, e, 0};
    if (occupied_index(e)) return out;
    if (e < top_) {
      if (const auto up = lowest_set_above(e, top_)) {
        out.found = *up;
        out.steps = *up - e;
        return out;
      }
      out.steps = top_ - e;
    }
    top_ = std::max(e, range_.i0 + 1) - 1;
    if (const auto down = highest_set_below(e)) {
      out.found = *down;
      out.steps += e - *down;
      return out;
    }
    return std::nullopt;  // unreachable while count_ > 0
  }

  // Highest nonempty internal index, from the exact tracker. Requires
  // track_errors(true).
  [[nodiscard]] std::optional<std::size_t> true_max() const {
    if (!exact_) return std::nullopt;
    const auto w = exact_->first();
    if (!w) return std::nullopt;
    return range_.imax - *w;
  }

  // Enable exact min tracking for error histograms. Must be set while empty.
  void track_errors(bool on) {
    if (on && !exact_) {
      exact_.emplace(buckets_.size());
      for (std::size_t w = 0; w < buckets_.size(); ++w) {
        if (!buckets_[w].empty()) exact_->set(w);
      }
    } else if (!on) {
      exact_.reset();
    }
  }

  [[nodiscard]] bool occupied_index(std::size_t internal) const noexcept {
    return (bits_[internal / kWordBits] >> (internal % kWordBits)) & 1U;
  }

  [[nodiscard]] const ApproxRange& range() const noexcept { return range_; }
  [[nodiscard]] EstimatorRounding rounding() const noexcept { return rounding_; }
  [[nodiscard]] const CurvatureState& curvature() const noexcept { return curvature_; }
  [[nodiscard]] const ApproxStats& stats() const noexcept { return stats_; }
  [[nodiscard]] ApproxStats& stats() noexcept { return stats_; }

 private:
  [[gnu::always_inline]] void set_occupied(std::size_t w, bool on) {
    const std::size_t i = range_.imax - w;
    curvature_.mark(i, on);
    const Word bit = Word{1} << (i % kWordBits);
    if (on) {
      bits_[i / kWordBits] |= bit;
      top_ = std::max(top_, i);
    } else {
      bits_[i / kWordBits] &= ~bit;
      if (i == top_ && i > range_.i0) --top_;
    }
    if (exact_) {
      if (on) {
        exact_->set(w);
      } else {
        exact_->clear(w);
      }
    }
  }

  // Lowest occupied index in (from, to].
  [[nodiscard]] std::optional<std::size_t> lowest_set_above(std::size_t from, std::size_t to) const noexcept {
    std::size_t i = from + 1;
    std::size_t word = i / kWordBits;
    Word bits = bits_[word] & (~Word{0} << (i % kWordBits));
    const std::size_t last = to / kWordBits;
    while (true) {
      if (const auto f = find_first_set(bits)) {
        const std::size_t hit = word * kWordBits + *f;
        return hit <= to ? std::optional<std::size_t>(hit) : std::nullopt;
      }
      if (++word > last) return std::nullopt;
      bits = bits_[word];
    }
  }

  // Highest occupied index in [i0, from).
  [[nodiscard]] std::optional<std::size_t> highest_set_below(std::size_t from) const noexcept {
    if (from <= range_.i0) return std::nullopt;
    std::size_t word = from / kWordBits;
    Word bits = bits_[word] & ((Word{1} << (from % kWordBits)) - 1);
    while (true) {
      if (const auto f = find_last_set(bits)) {
        const std::size_t hit = word * kWordBits + *f;
        return hit >= range_.i0 ? std::optional<std::size_t>(hit) : std::nullopt;
      }
      if (word-- == 0) return std::nullopt;
      bits = bits_[word];
    }
  }

  void record(const Lookup& hit) {
    ++stats_.lookups;
    if (hit.steps == 0) ++stats_.hits;
    stats_.search_steps += hit.steps;
    if (const auto t = true_max()) {
      const auto truth = static_cast<long long>(*t);
      ++stats_.estimate_error[static_cast<long long>(hit.estimate) - truth];
      ++stats_.fetch_error[static_cast<long long>(hit.found) - truth];
    }
  }

  ApproxRange range_;
  EstimatorRounding rounding_;
  std::vector<BucketList> buckets_;
  CurvatureState curvature_;
  std::size_t count_ = 0;
  std::vector<Word> bits_;  // occupancy by internal index
  // no occupied index lies above this; lowered lazily by failed upward scans
  mutable std::size_t top_ = 0;
  std::optional<OccupancyBitmap> exact_;
  ApproxStats stats_;
};

// Approximate gradient queue over internal indices [i0, imax], popping the
// (estimated) highest nonempty index.
template <class T>
class ApproxGradientQueue {
 public:
  explicit ApproxGradientQueue(const ApproxRange& range = ApproxRange::make(),
                               EstimatorRounding rounding = EstimatorRounding::nearest)
      : queue_(ApproxWindow(range, rounding)) {}

  [[nodiscard]] const ApproxRange& range() const noexcept { return queue_.window().range(); }
  [[nodiscard]] std::size_t size() const noexcept { return queue_.size(); }
  [[nodiscard]] bool empty() const noexcept { return queue_.empty(); }

  Handle insert(std::size_t index, T item) {
    const auto& r = range();
    if (index < r.i0 || index > r.imax) {
      throw RangeError("index " + std::to_string(index) + " outside [" + std::to_string(r.i0) + ", " +
                       std::to_string(r.imax) + "]");
    }
    return queue_.insert(r.imax - index, std::move(item));
  }

  std::optional<std::pair<std::size_t, T>> pop_max() {
    auto p = queue_.pop_min();
    if (!p) return std::nullopt;
    return std::pair<std::size_t, T>{range().imax - static_cast<std::size_t>(p->rank), std::move(p->item)};
  }

  T remove(Handle h) { return queue_.remove(h); }

  [[nodiscard]] std::optional<std::size_t> estimate_index() const { return queue_.window().estimate_max(); }

  [[nodiscard]] ApproxWindow& window() noexcept { return queue_.window(); }
  [[nodiscard]] const ApproxWindow& window() const noexcept { return queue_.window(); }

 private:
  BucketQueue<T, ApproxWindow> queue_;
};

// Min-queue over [0, N) backed by an approximate gradient window.
template <class T>
class ApproxMinQueue : public BucketQueue<T, ApproxWindow> {
 public:
  explicit ApproxMinQueue(const ApproxRange& range, EstimatorRounding rounding = EstimatorRounding::nearest)
      : BucketQueue<T, ApproxWindow>(ApproxWindow(range, rounding)) {}
};

// Circular approximate queue: cFFS window semantics over two approximate
// windows.
template <class T>
class CircularApproxQueue : public CircularQueue<T, ApproxWindow> {
 public:
  explicit CircularApproxQueue(const ApproxRange& range = ApproxRange::make(),
                               EstimatorRounding rounding = EstimatorRounding::nearest)
      : CircularQueue<T, ApproxWindow>(ApproxWindow(range, rounding)) {}
};

}  // namespace eiffel
