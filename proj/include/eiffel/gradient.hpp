#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "eiffel/link_pool.hpp"

namespace eiffel {

// Gradient-queue math. Each nonempty bucket i contributes the weight
// 2^{f(i)} (x - i)^2 with f(i) = i / alpha to a quadratic "curvature"
// a x^2 - b x + c; only a = sum 2^{f(i)} and b = sum i 2^{f(i)} are kept.
// With alpha = 1 the critical point b/a rounds up to the highest nonempty
// index. With alpha > 1 the same ratio is off by a near-constant shift.

inline constexpr unsigned kDefaultAlpha = 16;
inline constexpr std::size_t kDefaultApproxCapacity = 523;
// Chosen so that alpha = 16 yields I_0 = 124: g(16,123) = 4.65e-3,
// g(16,124) = 4.45e-3.
inline constexpr double kDefaultGThreshold = 4.5e-3;
// Largest weight exponent f(I_max) kept inside a double's exact-integer range.
inline constexpr double kMaxWeightExponent = 53.0;
// Exact queues (alpha = 1) in double precision.
inline constexpr std::size_t kMaxExactBuckets = 52;

// g(alpha, M) = (2^{1/alpha})^{-M-1}
[[nodiscard]] double decay_g(unsigned alpha, double m);
// u(alpha) = 1 / (1 - 2^{1/alpha}); negative for every alpha >= 1.
[[nodiscard]] double shift_u(unsigned alpha);
// Smallest M with g(alpha, M) <= threshold.
[[nodiscard]] std::size_t lowest_valid_index(unsigned alpha, double g_threshold);
// Largest index whose weight exponent stays within kMaxWeightExponent.
[[nodiscard]] std::size_t highest_representable_index(unsigned alpha);

enum class EstimatorRounding { nearest, ceil };

// Valid index range [i0, imax] of an approximate gradient queue.
struct ApproxRange {
  unsigned alpha = kDefaultAlpha;
  std::size_t i0 = 0;
  std::size_t imax = 0;
  double shift = 0.0;  // u(alpha)
  double g_threshold = kDefaultGThreshold;

  // Distance between the first and last valid index (523 for the defaults).
  [[nodiscard]] std::size_t capacity() const noexcept { return imax - i0; }
  // Buckets in [i0, imax].
  [[nodiscard]] std::size_t num_buckets() const noexcept { return imax - i0 + 1; }

  [[nodiscard]] static ApproxRange make(unsigned alpha = kDefaultAlpha,
                                        std::size_t capacity = kDefaultApproxCapacity,
                                        double g_threshold = kDefaultGThreshold);
  // Smallest power-of-two alpha >= 16 whose representable range fits
  // num_buckets buckets.
  [[nodiscard]] static ApproxRange for_buckets(std::size_t num_buckets,
                                               double g_threshold = kDefaultGThreshold);

  // Min-priority p (lower is more urgent) to internal max-index:
  // imax - (p - p_base).
  [[nodiscard]] std::size_t index_for_priority(Rank p, Rank p_base = 0) const;
  [[nodiscard]] Rank priority_for_index(std::size_t index, Rank p_base = 0) const;
};

class CurvatureState {
 public:
  CurvatureState(unsigned alpha, std::size_t num_indices);

  [[nodiscard]] unsigned alpha() const noexcept { return alpha_; }
  [[nodiscard]] std::size_t num_indices() const noexcept { return weights_.size(); }

  // Applies an empty <-> nonempty transition of bucket i.
  [[gnu::always_inline]] void mark(std::size_t i, bool nonempty) {
    if (i >= marks_.size() || (marks_[i] != 0) == nonempty) [[unlikely]] bad_mark(i, nonempty);
    marks_[i] = nonempty ? 1 : 0;
    if (nonempty) {
      a_ += weights_[i];
      b_ += moments_[i];
      ++count_;
      hi_ = std::max(hi_, i);
      resum_below_ = std::max(resum_below_, a_ * kResumRatio);
    } else {
      a_ -= weights_[i];
      b_ -= moments_[i];
      if (i == hi_ && i > 0) --hi_;
      if (--count_ == 0) {
        a_ = base_a_;
        b_ = base_b_;
        resum_below_ = 0.0;
      } else if (a_ < resum_below_) [[unlikely]] {
        resum();
      }
    }
  }

  [[nodiscard]] bool marked(std::size_t i) const { return marks_.at(i) != 0; }
  [[nodiscard]] std::size_t marked_count() const noexcept { return count_; }
  [[nodiscard]] double a() const noexcept { return a_; }
  [[nodiscard]] double b() const noexcept { return b_; }
  [[nodiscard]] double weight(std::size_t i) const { return weights_.at(i); }

  // b / a, or nothing when empty.
  [[nodiscard]] std::optional<double> critical_point() const noexcept {
    if (count_ == 0) return std::nullopt;
    return b_ / a_;
  }

  // ceil(b / a); only meaningful for alpha == 1.
  [[nodiscard]] std::optional<std::size_t> max_index_exact() const;

  // (a, b) recomputed from the marks.
  [[nodiscard]] std::pair<double, double> recompute() const;

  // Adds the weights of indices [0, below) to a and b as permanent mass that
  // is never reported as occupied.
  void set_floor(std::size_t below);
  [[nodiscard]] std::size_t floor() const noexcept { return floor_; }

 private:
  // Removing a large weight leaves rounding of its magnitude in the sums, so
  // they are rebuilt from the marks once a falls this far below its peak.
  static constexpr double kResumRatio = 0x1p-24;

  [[noreturn]] void bad_mark(std::size_t i, bool nonempty) const;
  void resum();

  unsigned alpha_;
  std::vector<double> weights_;
  std::vector<double> moments_;  // i * weight(i)
  std::vector<std::uint8_t> marks_;
  double a_ = 0.0;
  double b_ = 0.0;
  double base_a_ = 0.0;
  double base_b_ = 0.0;
  double resum_below_ = 0.0;
  std::size_t hi_ = 0;  // no mark above
  std::size_t floor_ = 0;
  std::size_t count_ = 0;
};

// Estimate of the highest nonempty index: b/a - u(alpha), rounded and clamped
// to [i0, imax]. Exact when every bucket in the range is nonempty.
inline std::optional<std::size_t> estimate_max_index(const CurvatureState& curvature, const ApproxRange& range,
                                                     EstimatorRounding rounding) {
  const auto x = curvature.critical_point();
  if (!x) return std::nullopt;
  // positive: b/a >= 0 and the shift is negative
  const double shifted = *x - range.shift;
  auto r = static_cast<std::size_t>(rounding == EstimatorRounding::nearest ? shifted + 0.5 : shifted);
  if (rounding == EstimatorRounding::ceil && static_cast<double>(r) < shifted) ++r;
  return std::clamp(r, range.i0, range.imax);
}

}  // namespace eiffel
