#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <algorithm>
#include "eiffel/approx_window.hpp"
#include "eiffel/bench/bench.hpp"
#include "eiffel/errors.hpp"
#include "eiffel/gradient.hpp"

namespace eiffel {
namespace {

// Brute-force estimator: sums recomputed in long double from the occupancy
// set plus every index below i0, shift evaluated from its closed form.
long long brute_estimate(const std::set<std::size_t>& occupied, const ApproxRange& r) {
  long double a = 0;
  long double b = 0;
  std::set<std::size_t> with_floor = occupied;
  for (std::size_t i = 0; i < r.i0; ++i) with_floor.insert(i);
  for (std::size_t i : with_floor) {
    const long double w = std::pow(2.0L, static_cast<long double>(i) / r.alpha);
    a += w;
    b += static_cast<long double>(i) * w;
  }
  const long double u = 1.0L / (1.0L - std::pow(2.0L, 1.0L / r.alpha));
  auto e = static_cast<long long>(std::llround(b / a - u));
  e = std::max<long long>(e, static_cast<long long>(r.i0));
  e = std::min<long long>(e, static_cast<long long>(r.imax));
  return e;
}

ApproxGradientQueue<int> filled(const std::set<std::size_t>& occupied) {
  ApproxGradientQueue<int> q;
  for (std::size_t i : occupied) q.insert(i, static_cast<int>(i));
  return q;
}

TEST(CurvatureState, MarkUpdatesSums) {
  CurvatureState c(1, 8);
  c.mark(0, true);
  c.mark(1, true);
  c.mark(2, true);
  EXPECT_EQ(c.a(), 7.0);
  EXPECT_EQ(c.b(), 10.0);
  c.mark(1, false);
  EXPECT_EQ(c.a(), 5.0);
  EXPECT_EQ(c.b(), 8.0);
}

TEST(CurvatureState, GeometricSumWhenAllMarked) {
  for (std::size_t n = 1; n < kMaxExactBuckets; ++n) {
    CurvatureState c(1, n + 1);
    for (std::size_t i = 1; i <= n; ++i) c.mark(i, true);
    EXPECT_EQ(c.a(), std::exp2(static_cast<double>(n + 1)) - 2.0) << n;
    EXPECT_EQ(c.max_index_exact(), n);
  }
}

TEST(CurvatureState, DoubleMarkIsStateError) {
  CurvatureState c(1, 4);
  c.mark(2, true);
  EXPECT_THROW(c.mark(2, true), StateError);
  EXPECT_THROW(c.mark(3, false), StateError);
  EXPECT_THROW(c.mark(4, true), RangeError);
}

TEST(CurvatureState, ExactWordCapped) {
  EXPECT_NO_THROW(CurvatureState(1, kMaxExactBuckets));
  EXPECT_THROW(CurvatureState(1, kMaxExactBuckets + 1), ConfigError);
  EXPECT_THROW(CurvatureState(0, 4), ConfigError);
}

TEST(CurvatureState, ExactMaxIndexExamples) {
  CurvatureState c(1, 40);
  EXPECT_FALSE(c.max_index_exact().has_value());
  for (std::size_t i : {0, 1, 2}) c.mark(i, true);
  EXPECT_EQ(c.max_index_exact(), 2U);

  CurvatureState single(1, 40);
  single.mark(37, true);
  EXPECT_EQ(*single.critical_point(), 37.0);
  EXPECT_EQ(single.max_index_exact(), 37U);
}

TEST(CurvatureState, EveryOccupancyOfSixteenBuckets) {
  for (std::uint32_t mask = 1; mask < (1U << 16); ++mask) {
    CurvatureState c(1, 16);
    std::size_t top = 0;
    for (std::size_t i = 0; i < 16; ++i) {
      if ((mask >> i) & 1U) {
        c.mark(i, true);
        top = i;
      }
    }
    ASSERT_EQ(c.max_index_exact(), top) << "mask=" << mask;
  }
}

TEST(CurvatureState, ClearingBelowMaxRaisesCriticalPoint) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    CurvatureState c(1, 40);
    const std::size_t top = 2 + rng() % 38;
    c.mark(top, true);
    std::vector<std::size_t> below;
    for (std::size_t i = 0; i < top; ++i) {
      if (rng() % 2) {
        c.mark(i, true);
        below.push_back(i);
      }
    }
    if (below.empty()) continue;
    const double before = *c.critical_point();
    c.mark(below[rng() % below.size()], false);
    ASSERT_GT(*c.critical_point(), before);
  }
}

TEST(CurvatureState, AccumulatorDriftStaysSmall) {
  std::mt19937_64 rng(2);
  const ApproxRange r = ApproxRange::make();
  CurvatureState c(r.alpha, r.imax + 1);
  std::uniform_int_distribution<std::size_t> pick(r.i0, r.imax);
  for (int step = 1; step <= 1000000; ++step) {
    const std::size_t i = pick(rng);
    c.mark(i, !c.marked(i));
    if (step % 100000 == 0 && c.marked_count() > 0) {
      const auto [a, b] = c.recompute();
      ASSERT_LE(std::abs(c.a() - a), 1e-6 * a);
      ASSERT_LE(std::abs(c.b() - b), 1e-6 * b);
    }
  }
}

TEST(CurvatureState, DrainResetsToZero) {
  CurvatureState c(16, 700);
  c.mark(3, true);
  c.mark(640, true);
  c.mark(640, false);
  c.mark(3, false);
  EXPECT_EQ(c.a(), 0.0);
  EXPECT_EQ(c.b(), 0.0);
  EXPECT_FALSE(c.critical_point().has_value());
}

TEST(CurvatureState, FloorIsPermanentMass) {
  CurvatureState c(16, 700);
  c.set_floor(124);
  const double a0 = c.a();
  EXPECT_GT(a0, 0.0);
  EXPECT_FALSE(c.critical_point().has_value());
  c.mark(500, true);
  EXPECT_THROW(c.set_floor(10), StateError);
  c.mark(500, false);
  EXPECT_EQ(c.a(), a0);
  EXPECT_EQ(c.recompute().first, a0);
}

TEST(ApproxRange, DefaultCalibration) {
  EXPECT_NEAR(shift_u(16), -22.59, 0.01);
  EXPECT_EQ(std::lround(-shift_u(16)), 23);
  EXPECT_EQ(static_cast<long>(-shift_u(16)), 22);
  const ApproxRange r = ApproxRange::make();
  EXPECT_EQ(r.alpha, 16U);
  EXPECT_EQ(r.i0, 124U);
  EXPECT_EQ(r.imax, 647U);
  EXPECT_EQ(r.capacity(), 523U);
  EXPECT_EQ(r.num_buckets(), 524U);
  EXPECT_LE(decay_g(16, 124), r.g_threshold);
  EXPECT_GT(decay_g(16, 123), r.g_threshold);
  EXPECT_LE(std::exp2(static_cast<double>(r.imax) / r.alpha), std::exp2(53.0));
}

TEST(ApproxRange, ConfigErrors) {
  EXPECT_THROW((void)ApproxRange::make(16, 2000), ConfigError);
  EXPECT_THROW((void)ApproxRange::make(16, 0), ConfigError);
  EXPECT_THROW((void)lowest_valid_index(16, 1.5), ConfigError);
}

TEST(ApproxRange, ForBucketsPicksSmallestFittingAlpha) {
  EXPECT_EQ(ApproxRange::for_buckets(524).alpha, 16U);
  const ApproxRange big = ApproxRange::for_buckets(10000);
  EXPECT_EQ(big.num_buckets(), 10000U);
  EXPECT_LE(big.imax, highest_representable_index(big.alpha));
  EXPECT_GT(big.i0 + 9999, highest_representable_index(big.alpha / 2));
}

TEST(ApproxRange, PriorityMirror) {
  const ApproxRange r = ApproxRange::make();
  EXPECT_EQ(r.index_for_priority(0), 647U);
  EXPECT_EQ(r.index_for_priority(523), 124U);
  EXPECT_THROW((void)r.index_for_priority(524), RangeError);
  EXPECT_THROW((void)r.index_for_priority(5, 10), RangeError);
  for (Rank p = 1000; p <= 1523; ++p) {
    EXPECT_EQ(r.priority_for_index(r.index_for_priority(p, 1000), 1000), p);
  }
}

TEST(ApproxGradientQueue, AllFullHasZeroError) {
  const ApproxRange r = ApproxRange::make();
  std::set<std::size_t> all;
  for (std::size_t i = r.i0; i <= r.imax; ++i) all.insert(i);
  auto q = filled(all);
  EXPECT_EQ(q.estimate_index(), r.imax);
  EXPECT_EQ(brute_estimate(all, r), static_cast<long long>(r.imax));
  const auto lookup = q.window().find_max();
  ASSERT_TRUE(lookup);
  EXPECT_EQ(lookup->steps, 0U);
}

// A full run [i0, M] drained from the top: every fetch is exact and the
// estimate is at most one bucket high (the decay term near i0).
TEST(ApproxGradientQueue, FullRunDrainsExactly) {
  const ApproxRange r = ApproxRange::make();
  ApproxGradientQueue<int> q;
  for (std::size_t i = r.i0; i <= r.imax; ++i) q.insert(i, 0);
  q.window().track_errors(true);
  for (std::size_t m = r.imax + 1; m-- > r.i0;) ASSERT_EQ(q.pop_max()->first, m);
  const auto& st = q.window().stats();
  EXPECT_EQ(st.mean_abs_fetch_error(), 0.0);
  EXPECT_GE(st.estimate_error.begin()->first, 0);
  EXPECT_LE(st.estimate_error.rbegin()->first, 1);
  EXPECT_LT(st.search_steps, 10U);
}

TEST(ApproxGradientQueue, EvenSpacingHasZeroError) {
  const ApproxRange r = ApproxRange::make();
  std::set<std::size_t> every;
  for (std::size_t i = r.imax;; i -= r.alpha) {
    every.insert(i);
    if (i < r.i0 + r.alpha) break;
  }
  auto q = filled(every);
  EXPECT_EQ(q.estimate_index(), r.imax);
  EXPECT_EQ(q.pop_max()->first, r.imax);
}

// Lower half of the range full plus one element at the 3/4 point. The
// concentration drags the critical point below the outlier; once the
// calibrated shift is added the estimate lands above it, and the downward
// scan recovers the outlier.
TEST(ApproxGradientQueue, HalfFullPlusOutlier) {
  const ApproxRange r = ApproxRange::make();
  std::set<std::size_t> occ;
  for (std::size_t i = r.i0; i <= r.i0 + (r.imax - r.i0) / 2; ++i) occ.insert(i);
  const std::size_t outlier = r.i0 + 3 * (r.imax - r.i0) / 4;
  occ.insert(outlier);
  auto q = filled(occ);
  const double x = *q.window().curvature().critical_point();
  EXPECT_LT(x, static_cast<double>(outlier));
  EXPECT_LT(std::ceil(x) + r.shift - static_cast<double>(outlier), 0.0);

  const long long expect = brute_estimate(occ, r);
  EXPECT_EQ(static_cast<long long>(*q.estimate_index()), expect);
  EXPECT_EQ(expect - static_cast<long long>(outlier), 11);
  q.window().track_errors(true);
  const auto p = q.pop_max();
  ASSERT_TRUE(p);
  EXPECT_EQ(p->first, outlier);
  const auto& st = q.window().stats();
  EXPECT_EQ(st.estimate_error.begin()->first, 11);
  EXPECT_EQ(st.fetch_error.begin()->first, 0);
  EXPECT_EQ(st.search_steps, 11U);
}

TEST(ApproxGradientQueue, SingleBucketAtTop) {
  auto q = filled({647});
  EXPECT_EQ(q.estimate_index(), 647U);
  EXPECT_EQ(q.pop_max()->first, 647U);
  EXPECT_FALSE(q.pop_max().has_value());
}

TEST(ApproxGradientQueue, RandomOccupancyMatchesBruteForce) {
  std::mt19937_64 rng(4);
  const ApproxRange r = ApproxRange::make();
  for (int trial = 0; trial < 300; ++trial) {
    std::set<std::size_t> occ;
    const double fill = 0.05 + 0.9 * static_cast<double>(trial) / 300.0;
    for (std::size_t i = r.i0; i <= r.imax; ++i) {
      if (std::uniform_real_distribution<double>(0, 1)(rng) < fill) occ.insert(i);
    }
    if (occ.empty()) continue;
    auto q = filled(occ);
    ASSERT_EQ(static_cast<long long>(*q.estimate_index()), brute_estimate(occ, r)) << "trial " << trial;
  }
}

TEST(ApproxGradientQueue, MissScansUpwardFirst) {
  const ApproxRange r = ApproxRange::make();
  std::set<std::size_t> occ;
  for (std::size_t i = r.i0; i <= r.i0 + 300; ++i) occ.insert(i);
  occ.insert(r.i0 + 340);
  auto q = filled(occ);
  const auto est = *q.estimate_index();
  ASSERT_EQ(static_cast<long long>(est), brute_estimate(occ, r));
  ASSERT_GT(est, r.i0 + 300);
  ASSERT_LT(est, r.i0 + 340);
  const auto hit = q.window().find_max();
  EXPECT_EQ(hit->found, r.i0 + 340);
  EXPECT_EQ(hit->steps, r.i0 + 340 - est);
}

TEST(ApproxGradientQueue, FailedUpwardScanLowersBound) {
  const ApproxRange r = ApproxRange::make();
  auto pattern = eiffel::bench::preset_indices(eiffel::bench::Pattern::half_full_plus_outlier, r);
  const std::size_t outlier = pattern.back();
  ApproxGradientQueue<int> q;
  for (std::size_t i : pattern) q.insert(i, 0);
  const auto h = q.insert(r.imax, 1);
  (void)q.remove(h);
  const auto est = *q.estimate_index();
  ASSERT_EQ(est, outlier + 11);
  // the stale bound still reaches imax - 1 after the erase
  const auto first = q.window().find_max();
  EXPECT_EQ(first->found, outlier);
  EXPECT_EQ(first->steps, (r.imax - 1 - est) + 11);
  const auto second = q.window().find_max();
  EXPECT_EQ(second->found, outlier);
  EXPECT_EQ(second->steps, 11U);
}

TEST(ApproxGradientQueue, DenseDrainAtLargeAlphaSearchesShort) {
  const ApproxRange r = ApproxRange::for_buckets(10000);
  std::mt19937_64 rng(21);
  std::vector<std::size_t> idx;
  for (std::size_t i = r.i0; i <= r.imax; ++i) idx.push_back(i);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(idx.size() * 9 / 10);
  ApproxGradientQueue<int> q(r);
  for (std::size_t i : idx) q.insert(i, 0);
  q.window().track_errors(true);
  std::size_t n = 0;
  while (q.pop_max()) ++n;
  EXPECT_EQ(n, idx.size());
  EXPECT_LT(q.window().stats().mean_search_len(), 10.0);
}

TEST(ApproxGradientQueue, FullDrainAtLargeAlphaFetchesExactly) {
  const ApproxRange r = ApproxRange::for_buckets(10000);
  ApproxGradientQueue<int> q(r);
  for (std::size_t i = r.i0; i <= r.imax; ++i) q.insert(i, 0);
  q.window().track_errors(true);
  while (q.pop_max()) {
  }
  const ApproxStats& s = q.window().stats();
  EXPECT_EQ(s.mean_abs_fetch_error(), 0.0);
  // near i0 the estimate carries the M g / (1 - g) bias of a full geometric run
  const double g = std::exp2(-(static_cast<double>(r.i0) + 1.0) / r.alpha);
  const double bias = static_cast<double>(r.i0) * g / (1.0 - g);
  EXPECT_GE(s.estimate_error.begin()->first, -1);
  EXPECT_LE(s.estimate_error.rbegin()->first, std::ceil(bias) + 1);
}

TEST(ApproxGradientQueue, OutOfRangeIndexRejected) {
  ApproxGradientQueue<int> q;
  EXPECT_THROW(q.insert(123, 0), RangeError);
  EXPECT_THROW(q.insert(648, 0), RangeError);
}

TEST(ApproxGradientQueue, DrainReturnsEveryItem) {
  std::mt19937_64 rng(8);
  ApproxGradientQueue<int> q;
  q.window().track_errors(true);
  for (int k = 0; k < 5000; ++k) q.insert(124 + rng() % 524, k);
  std::vector<bool> seen(5000, false);
  while (auto p = q.pop_max()) {
    ASSERT_FALSE(seen[p->second]);
    seen[p->second] = true;
  }
  EXPECT_EQ(std::count(seen.begin(), seen.end(), true), 5000);
  const auto& st = q.window().stats();
  EXPECT_EQ(st.lookups, 5000U);
  EXPECT_GE(st.hits, 1U);
}

TEST(ApproxGradientQueue, CeilRoundingIsSelectable) {
  const ApproxRange r = ApproxRange::make();
  ApproxGradientQueue<int> nearest(r, EstimatorRounding::nearest);
  ApproxGradientQueue<int> ceiled(r, EstimatorRounding::ceil);
  for (std::size_t i = r.i0; i < r.i0 + 200; i += 3) {
    nearest.insert(i, 0);
    ceiled.insert(i, 0);
  }
  const auto x = *nearest.window().curvature().critical_point() - r.shift;
  EXPECT_EQ(nearest.estimate_index(), static_cast<std::size_t>(std::round(x)));
  EXPECT_EQ(ceiled.estimate_index(), static_cast<std::size_t>(std::ceil(x)));
}

}  // namespace
}  // namespace eiffel
