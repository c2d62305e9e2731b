#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "eiffel/approx_window.hpp"
#include "eiffel/circular_queue.hpp"
#include "support/sorted_oracle.hpp"

namespace eiffel {
namespace {

using testing::SortedOracle;

template <class Q>
Q make_queue(std::size_t q);

template <>
CffsQueue<int> make_queue<CffsQueue<int>>(std::size_t q) {
  return CffsQueue<int>(q);
}

template <>
CircularApproxQueue<int> make_queue<CircularApproxQueue<int>>(std::size_t q) {
  return CircularApproxQueue<int>(ApproxRange::for_buckets(q));
}

template <class Q>
class CircularContract : public ::testing::Test {};

using CircularKinds = ::testing::Types<CffsQueue<int>, CircularApproxQueue<int>>;
TYPED_TEST_SUITE(CircularContract, CircularKinds);

TYPED_TEST(CircularContract, InsertPlacesByOffset) {
  auto q = make_queue<TypeParam>(8);
  q.insert(6, 1);
  EXPECT_FALSE(q.primary().bucket(6).empty());
  auto h13 = q.insert(13, 2);
  EXPECT_FALSE(q.secondary().bucket(5).empty());
  EXPECT_FALSE(q.is_overflow(h13));
  auto h99 = q.insert(99, 3);
  EXPECT_TRUE(q.is_overflow(h99));
  EXPECT_EQ(q.size(), 3U);
}

TYPED_TEST(CircularContract, StaleRankRejected) {
  auto q = make_queue<TypeParam>(8);
  q.insert(10, 1);
  q.pop_min();
  EXPECT_EQ(q.h_index(), 8U);
  EXPECT_THROW(q.insert(7, 2), StaleRankError);
}

TYPED_TEST(CircularContract, PopsPrimaryFirst) {
  auto q = make_queue<TypeParam>(8);
  q.insert(10, 2);
  q.insert(3, 1);
  EXPECT_EQ(q.min_rank(), 3U);
  auto p = q.pop_min();
  ASSERT_TRUE(p);
  EXPECT_EQ(p->rank, 3U);
  EXPECT_EQ(q.h_index(), 0U);
}

TYPED_TEST(CircularContract, RotatesWhenPrimaryEmpty) {
  auto q = make_queue<TypeParam>(8);
  q.insert(10, 7);
  EXPECT_EQ(q.min_rank(), 10U);
  auto p = q.pop_min();
  ASSERT_TRUE(p);
  EXPECT_EQ(p->rank, 10U);
  EXPECT_EQ(p->item, 7);
  EXPECT_EQ(q.h_index(), 8U);
  EXPECT_EQ(q.rotations(), 1U);
  EXPECT_FALSE(q.pop_min().has_value());
  EXPECT_FALSE(q.min_rank().has_value());
}

TYPED_TEST(CircularContract, ExplicitRotate) {
  auto q = make_queue<TypeParam>(8);
  q.rotate();
  EXPECT_EQ(q.h_index(), 8U);
  q.insert(9, 1);
  EXPECT_THROW(q.rotate(), StateError);
}

TYPED_TEST(CircularContract, EmptyInsertSnapsWindow) {
  auto q = make_queue<TypeParam>(8);
  q.insert(1234, 1);
  EXPECT_EQ(q.h_index(), 1232U);
  EXPECT_EQ(q.pop_min()->rank, 1234U);
}

TYPED_TEST(CircularContract, FarOverflowSurvivesUntilCovered) {
  auto q = make_queue<TypeParam>(8);
  q.insert(2, 0);
  q.insert(99, 1);
  EXPECT_EQ(q.pop_min()->rank, 2U);
  auto p = q.pop_min();
  ASSERT_TRUE(p);
  EXPECT_EQ(p->rank, 99U);
  EXPECT_EQ(q.h_index(), 96U);
}

TYPED_TEST(CircularContract, OverflowRefiledBehindWindowItems) {
  auto q = make_queue<TypeParam>(8);
  q.insert(1, 0);
  q.insert(30, 1);
  q.insert(20, 2);
  q.insert(14, 3);
  std::vector<Rank> got;
  while (auto p = q.pop_min()) got.push_back(p->rank);
  EXPECT_EQ(got, (std::vector<Rank>{1, 14, 20, 30}));
  EXPECT_GE(q.refiles(), 1U);
}

TEST(CffsQueue, EqualRanksStayFifoThroughOverflow) {
  CffsQueue<int> q(8);
  q.insert(0, -1);
  q.insert(20, 0);  // overflow at insert time
  q.pop_min();
  q.insert(9, -2);
  q.pop_min();  // rotates: 20 now lands in the secondary window
  q.insert(20, 1);
  q.insert(20, 2);
  std::vector<int> items;
  while (auto p = q.pop_min()) items.push_back(p->item);
  EXPECT_EQ(items, (std::vector<int>{0, 1, 2}));
}

TEST(CffsQueue, OnlyOverflowItemsComeOutInOrder) {
  CffsQueue<int> q(8);
  q.insert(0, -1);
  for (int i = 0; i < 6; ++i) q.insert(static_cast<Rank>(60 - 7 * i), i);
  q.pop_min();
  std::vector<int> items;
  std::vector<Rank> ranks;
  while (auto p = q.pop_min()) {
    ranks.push_back(p->rank);
    items.push_back(p->item);
  }
  EXPECT_EQ(ranks, (std::vector<Rank>{25, 32, 39, 46, 53, 60}));
  EXPECT_EQ(items, (std::vector<int>{5, 4, 3, 2, 1, 0}));
}

TEST(CffsQueue, MinRankMatchesPopMinAcrossOverflow) {
  std::mt19937_64 rng(11);
  CffsQueue<int> q(16);
  std::uniform_int_distribution<Rank> span(0, 200);
  for (int round = 0; round < 2000; ++round) {
    const int k = static_cast<int>(rng() % 4);
    for (int i = 0; i < k; ++i) q.insert(q.h_index() + span(rng), i);
    const auto expect = q.min_rank();
    const auto p = q.pop_min();
    ASSERT_EQ(expect.has_value(), p.has_value());
    if (p) {
      ASSERT_EQ(*expect, p->rank);
    }
  }
}

// Ranks drawn from the two live windows: the pop sequence must match the
// oracle exactly, ties included.
TEST(CffsQueue, InWindowOpsMatchOracle) {
  std::mt19937_64 rng(5);
  const std::size_t q_size = 1024;
  CffsQueue<std::uint64_t> q(q_size);
  SortedOracle oracle;
  std::vector<std::pair<Handle, std::uint64_t>> live;
  std::uniform_int_distribution<int> op(0, 19);
  std::uint64_t pops = 0;
  for (std::uint64_t k = 0; k < 1000000; ++k) {
    const int o = op(rng);
    if (o < 9) {
      const Rank r = q.h_index() + rng() % (2 * q_size);
      live.emplace_back(q.insert(r, k), k);
      oracle.insert(r, k);
    } else if (o < 19) {
      auto p = q.pop_min();
      auto e = oracle.pop_min();
      ASSERT_EQ(p.has_value(), e.has_value());
      if (p) {
        ASSERT_EQ(p->rank, e->first);
        ASSERT_EQ(p->item, e->second);
        ++pops;
      }
    } else if (!live.empty()) {
      const std::size_t i = rng() % live.size();
      auto [h, key] = live[i];
      live[i] = live.back();
      live.pop_back();
      if (oracle.contains(key)) {
        ASSERT_EQ(q.remove(h), key);
        oracle.remove(key);
      }
    }
    ASSERT_EQ(q.size(), oracle.size());
  }
  EXPECT_GT(q.rotations(), 100U);
  EXPECT_GT(pops, 100000U);
}

// Ranks may overshoot both windows. Pops stay rank-sorted; only the order
// among equal ranks that passed through the overflow bucket may differ.
TEST(CffsQueue, OverflowNeverOvertakesLowerRanks) {
  std::mt19937_64 rng(9);
  const std::size_t q_size = 64;
  CffsQueue<std::uint64_t> q(q_size);
  SortedOracle oracle;
  std::uniform_int_distribution<int> op(0, 2);
  for (std::uint64_t k = 0; k < 300000; ++k) {
    if (op(rng) < 2) {
      const Rank r = q.h_index() + rng() % (12 * q_size);
      q.insert(r, k);
      oracle.insert(r, k);
    } else {
      auto p = q.pop_min();
      if (!p) {
        ASSERT_EQ(oracle.size(), 0U);
        continue;
      }
      ASSERT_EQ(p->rank, *oracle.min_rank());
      oracle.remove(p->item);
    }
  }
  while (auto p = q.pop_min()) {
    ASSERT_EQ(p->rank, *oracle.min_rank());
    oracle.remove(p->item);
  }
  EXPECT_EQ(oracle.size(), 0U);
  EXPECT_GT(q.refiles(), 0U);
}

TEST(CircularApproxQueue, ConservesItemsWhileRotating) {
  std::mt19937_64 rng(21);
  CircularApproxQueue<std::uint64_t> q;
  const std::size_t q_size = q.q_size();
  EXPECT_EQ(q_size, 524U);
  std::uint64_t in = 0;
  std::uint64_t out = 0;
  for (std::uint64_t k = 0; k < 200000; ++k) {
    if (rng() % 2 != 0) {
      q.insert(q.h_index() + rng() % (2 * q_size), k);
      ++in;
    } else if (auto p = q.pop_min()) {
      ASSERT_GE(p->rank, q.h_index());
      ++out;
    }
    ASSERT_EQ(q.size(), in - out);
  }
  while (q.pop_min()) ++out;
  EXPECT_EQ(in, out);
  EXPECT_GT(q.rotations(), 10U);
}

}  // namespace
}  // namespace eiffel
