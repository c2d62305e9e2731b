#include "eiffel/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eiffel/errors.hpp"

namespace eiffel {

double decay_g(unsigned alpha, double m) {
  return std::exp2(-(m + 1.0) / static_cast<double>(alpha));
}

double shift_u(unsigned alpha) {
  return 1.0 / (1.0 - std::exp2(1.0 / static_cast<double>(alpha)));
}

std::size_t lowest_valid_index(unsigned alpha, double g_threshold) {
  if (alpha == 0) throw ConfigError("alpha must be positive");
  if (!(g_threshold > 0.0 && g_threshold < 1.0)) throw ConfigError("g threshold must lie in (0, 1)");
  // Closed form first, then settle on the exact boundary.
  auto m = static_cast<std::size_t>(
      std::max(0.0, std::floor(static_cast<double>(alpha) * std::log2(1.0 / g_threshold)) - 1.0));
  while (m > 0 && decay_g(alpha, static_cast<double>(m - 1)) <= g_threshold) --m;
  while (decay_g(alpha, static_cast<double>(m)) > g_threshold) ++m;
  return m;
}

std::size_t highest_representable_index(unsigned alpha) {
  return static_cast<std::size_t>(std::floor(kMaxWeightExponent * alpha));
}

ApproxRange ApproxRange::make(unsigned alpha, std::size_t capacity, double g_threshold) {
  ApproxRange r;
  r.alpha = alpha;
  r.g_threshold = g_threshold;
  r.i0 = lowest_valid_index(alpha, g_threshold);
  r.imax = r.i0 + capacity;
  r.shift = shift_u(alpha);
  if (capacity == 0) throw ConfigError("approximate queue capacity must be positive");
  if (r.imax > highest_representable_index(alpha)) {
    throw ConfigError("capacity " + std::to_string(capacity) + " exceeds the representable range for alpha " +
                      std::to_string(alpha));
  }
  return r;
}

ApproxRange ApproxRange::for_buckets(std::size_t num_buckets, double g_threshold) {
  if (num_buckets < 2) throw ConfigError("approximate queue needs at least two buckets");
  for (unsigned alpha = kDefaultAlpha; alpha <= (1U << 20); alpha *= 2) {
    const std::size_t i0 = lowest_valid_index(alpha, g_threshold);
    if (i0 + num_buckets - 1 <= highest_representable_index(alpha)) {
      return make(alpha, num_buckets - 1, g_threshold);
    }
  }
  throw ConfigError("no alpha can represent " + std::to_string(num_buckets) + " buckets");
}

std::size_t ApproxRange::index_for_priority(Rank p, Rank p_base) const {
  if (p < p_base || p - p_base > capacity()) {
    throw RangeError("priority " + std::to_string(p) + " outside [" + std::to_string(p_base) + ", " +
                     std::to_string(p_base + capacity()) + "]");
  }
  return imax - static_cast<std::size_t>(p - p_base);
}

Rank ApproxRange::priority_for_index(std::size_t index, Rank p_base) const {
  if (index < i0 || index > imax) throw RangeError("index outside [i0, imax]");
  return p_base + (imax - index);
}

CurvatureState::CurvatureState(unsigned alpha, std::size_t num_indices)
    : alpha_(alpha), weights_(num_indices), moments_(num_indices), marks_(num_indices, 0) {
  if (alpha == 0) throw ConfigError("alpha must be positive");
  if (num_indices == 0) throw ConfigError("curvature needs at least one index");
  if (alpha == 1 && num_indices > kMaxExactBuckets) {
    throw ConfigError("exact gradient word holds at most " + std::to_string(kMaxExactBuckets) + " buckets");
  }
  for (std::size_t i = 0; i < num_indices; ++i) {
    weights_[i] = std::exp2(static_cast<double>(i) / alpha);
    moments_[i] = static_cast<double>(i) * weights_[i];
  }
}

void CurvatureState::bad_mark(std::size_t i, bool nonempty) const {
  if (i >= marks_.size()) throw RangeError("curvature index " + std::to_string(i) + " out of range");
  throw StateError("bucket " + std::to_string(i) + (nonempty ? " already nonempty" : " already empty"));
}

std::optional<std::size_t> CurvatureState::max_index_exact() const {
  if (count_ == 0) return std::nullopt;
  return static_cast<std::size_t>(std::ceil(b_ / a_));
}

void CurvatureState::set_floor(std::size_t below) {
  if (count_ != 0) throw StateError("floor set on a nonempty curvature");
  if (below > weights_.size()) throw RangeError("floor beyond curvature range");
  floor_ = below;
  base_a_ = 0.0;
  base_b_ = 0.0;
  for (std::size_t i = 0; i < below; ++i) {
    base_a_ += weights_[i];
    base_b_ += moments_[i];
  }
  a_ = base_a_;
  b_ = base_b_;
}

void CurvatureState::resum() {
  double a = base_a_;
  double b = base_b_;
  for (std::size_t i = floor_; i <= hi_; ++i) {
    const double m = marks_[i];
    a += m * weights_[i];
    b += m * moments_[i];
  }
  a_ = a;
  b_ = b;
  resum_below_ = a * kResumRatio;
}

std::pair<double, double> CurvatureState::recompute() const {
  double a = base_a_;
  double b = base_b_;
  for (std::size_t i = floor_; i < marks_.size(); ++i) {
    const double m = marks_[i];
    a += m * weights_[i];
    b += m * moments_[i];
  }
  return {a, b};
}

}  // namespace eiffel
