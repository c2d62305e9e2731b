#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "eiffel/bucket_queue.hpp"
#include "eiffel/ffs.hpp"
#include "eiffel/occupancy_bitmap.hpp"
#include "support/sorted_oracle.hpp"

namespace eiffel {
namespace {

using testing::SortedOracle;

TEST(FindFirstSet, LowestSetBit) {
  EXPECT_EQ(find_first_set((Word{1} << 2) | (Word{1} << 5)), 2U);
  EXPECT_EQ(find_first_set(0), std::nullopt);
  EXPECT_EQ(find_first_set(Word{1} << 63), 63U);
  EXPECT_EQ(find_last_set((Word{1} << 2) | (Word{1} << 5)), 5U);
}

TEST(OccupancyBitmap, DepthFollowsWordFanout) {
  EXPECT_EQ(OccupancyBitmap(1).depth(), 1U);
  EXPECT_EQ(OccupancyBitmap(64).depth(), 1U);
  EXPECT_EQ(OccupancyBitmap(65).depth(), 2U);
  EXPECT_EQ(OccupancyBitmap(4096).depth(), 2U);
  EXPECT_EQ(OccupancyBitmap(4097).depth(), 3U);
  EXPECT_EQ(OccupancyBitmap(10000).depth(), 3U);
  EXPECT_EQ(OccupancyBitmap(10000).level(0).size(), 157U);
  EXPECT_EQ(OccupancyBitmap(10000).level(1).size(), 3U);
}

TEST(OccupancyBitmap, RandomOpsStayConsistent) {
  std::mt19937_64 rng(7);
  for (std::size_t n : {1UL, 63UL, 64UL, 65UL, 300UL, 4097UL, 20000UL}) {
    OccupancyBitmap bm(n);
    std::vector<bool> ref(n, false);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int step = 0; step < 5000; ++step) {
      const std::size_t i = pick(rng);
      if (ref[i]) {
        bm.clear(i);
      } else {
        bm.set(i);
      }
      ref[i] = !ref[i];
      if (step % 97 == 0) {
        ASSERT_TRUE(bm.consistent()) << "n=" << n;
      }
      const auto lo = std::find(ref.begin(), ref.end(), true);
      const auto first = bm.first();
      if (lo == ref.end()) {
        ASSERT_FALSE(first.has_value());
      } else {
        ASSERT_EQ(*first, static_cast<std::size_t>(lo - ref.begin()));
        ASSERT_EQ(bm.last_probe_count(), bm.depth());
      }
      ASSERT_EQ(bm.test(i), ref[i]);
    }
    ASSERT_TRUE(bm.consistent());
  }
}

TEST(HffsQueue, InsertAppendsToRankBucket) {
  HffsQueue<std::string> q(16);
  q.insert(6, "p");
  EXPECT_EQ(q.bucket_items(6), std::vector<std::string>{"p"});
  EXPECT_TRUE(q.bitmap().test(6));
  q.insert(6, "p2");
  EXPECT_EQ(q.bucket_items(6), (std::vector<std::string>{"p", "p2"}));
}

TEST(HffsQueue, RankOutOfRangeThrows) {
  HffsQueue<int> q(16);
  EXPECT_THROW(q.insert(16, 1), RangeError);
}

TEST(HffsQueue, PopMinReturnsLowestBucketHead) {
  HffsQueue<char> q(16);
  EXPECT_FALSE(q.pop_min().has_value());
  EXPECT_FALSE(q.min_rank().has_value());
  q.insert(7, 'b');
  q.insert(3, 'a');
  EXPECT_EQ(q.min_rank(), 3U);
  auto p = q.pop_min();
  ASSERT_TRUE(p);
  EXPECT_EQ(p->rank, 3U);
  EXPECT_EQ(p->item, 'a');
  EXPECT_EQ(q.min_rank(), 7U);
}

TEST(HffsQueue, EqualRanksLeaveInFifoOrder) {
  HffsQueue<char> q(16);
  q.insert(5, 'a');
  q.insert(5, 'b');
  EXPECT_EQ(q.min_rank(), 5U);
  EXPECT_EQ(q.pop_min()->item, 'a');
  EXPECT_EQ(q.pop_min()->item, 'b');
  EXPECT_TRUE(q.empty());
}

TEST(HffsQueue, RemoveSoleItemClearsLeafBit) {
  HffsQueue<int> q(16);
  auto h = q.insert(4, 1);
  EXPECT_EQ(q.remove(h), 1);
  EXPECT_FALSE(q.bitmap().test(4));
  EXPECT_TRUE(q.bitmap().consistent());
  EXPECT_THROW(q.remove(h), InvalidHandle);
}

TEST(HffsQueue, RemoveMiddleKeepsNeighbourOrder) {
  HffsQueue<int> q(16);
  q.insert(2, 1);
  auto mid = q.insert(2, 2);
  q.insert(2, 3);
  q.remove(mid);
  EXPECT_EQ(q.bucket_items(2), (std::vector<int>{1, 3}));
}

TEST(HffsQueue, StaleHandleAfterSlotReuse) {
  HffsQueue<int> q(8);
  auto h = q.insert(1, 10);
  q.pop_min();
  auto h2 = q.insert(1, 11);
  EXPECT_EQ(h.slot, h2.slot);
  EXPECT_THROW(q.remove(h), InvalidHandle);
  EXPECT_EQ(q.remove(h2), 11);
}

TEST(HffsQueue, RandomFillDrainsInOracleOrder) {
  std::mt19937_64 rng(42);
  const std::size_t n = 10000;
  HffsQueue<std::uint64_t> q(n);
  SortedOracle oracle;
  std::uniform_int_distribution<std::uint64_t> rank(0, n - 1);
  for (std::uint64_t k = 0; k < 100000; ++k) {
    const auto r = rank(rng);
    q.insert(r, k);
    oracle.insert(r, k);
  }
  std::uint64_t last = 0;
  while (auto p = q.pop_min()) {
    auto o = oracle.pop_min();
    ASSERT_TRUE(o);
    ASSERT_EQ(p->rank, o->first);
    ASSERT_EQ(p->item, o->second);
    ASSERT_GE(p->rank, last);
    last = p->rank;
    ASSERT_EQ(q.bitmap().last_probe_count(), q.depth());
  }
  EXPECT_EQ(oracle.size(), 0U);
  EXPECT_TRUE(q.bitmap().consistent());
}

// Every op sequence over {insert r, pop, remove oldest live} up to the given
// length, checked step by step against the oracle.
struct ExhaustiveRun {
  std::size_t n;
  std::size_t max_len;
  std::size_t sequences = 0;

  struct State {
    HffsQueue<std::uint64_t> q;
    SortedOracle oracle;
    std::vector<std::pair<Handle, std::uint64_t>> live;
    std::uint64_t next_key = 0;
  };

  void explore(const State& s, std::size_t depth) {
    ++sequences;
    if (depth == max_len) return;
    for (std::size_t op = 0; op < n + 2; ++op) {
      State t = s;
      if (op < n) {
        const auto key = t.next_key++;
        t.live.emplace_back(t.q.insert(op, key), key);
        t.oracle.insert(op, key);
      } else if (op == n) {
        auto p = t.q.pop_min();
        auto o = t.oracle.pop_min();
        ASSERT_EQ(p.has_value(), o.has_value());
        if (p) {
          ASSERT_EQ(p->rank, o->first);
          ASSERT_EQ(p->item, o->second);
          std::erase_if(t.live, [&](const auto& e) { return e.second == p->item; });
        }
      } else {
        if (t.live.empty()) continue;
        auto [h, key] = t.live.front();
        t.live.erase(t.live.begin());
        ASSERT_EQ(t.q.remove(h), key);
        t.oracle.remove(key);
      }
      ASSERT_EQ(t.q.min_rank(), t.oracle.min_rank());
      ASSERT_TRUE(t.q.bitmap().consistent());
      explore(t, depth + 1);
      if (::testing::Test::HasFatalFailure()) return;
    }
  }
};

TEST(HffsQueue, ExhaustiveSmallSequencesMatchOracle) {
  // (buckets, max sequence length); the alphabet is buckets + 2 symbols.
  const std::pair<std::size_t, std::size_t> budgets[] = {{1, 12}, {2, 9}, {3, 7}, {4, 6}, {8, 4}};
  for (auto [n, len] : budgets) {
    ExhaustiveRun run{n, len};
    run.explore(ExhaustiveRun::State{HffsQueue<std::uint64_t>(n), {}, {}, 0}, 0);
    ASSERT_FALSE(HasFatalFailure()) << "n=" << n;
    EXPECT_GT(run.sequences, 1000U);
  }
}

TEST(HffsQueue, RandomInterleavingMatchesOracle) {
  std::mt19937_64 rng(3);
  const std::size_t n = 10000;
  HffsQueue<std::uint64_t> q(n);
  SortedOracle oracle;
  std::vector<std::pair<Handle, std::uint64_t>> live;
  std::uniform_int_distribution<std::uint64_t> rank(0, n - 1);
  std::uniform_int_distribution<int> op(0, 9);
  for (std::uint64_t k = 0; k < 200000; ++k) {
    const int o = op(rng);
    if (o < 5) {
      const auto r = rank(rng);
      live.emplace_back(q.insert(r, k), k);
      oracle.insert(r, k);
    } else if (o < 8) {
      auto p = q.pop_min();
      auto e = oracle.pop_min();
      ASSERT_EQ(p.has_value(), e.has_value());
      if (p) {
        ASSERT_EQ(p->item, e->second);
      }
    } else if (!live.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
      const std::size_t i = pick(rng);
      auto [h, key] = live[i];
      live[i] = live.back();
      live.pop_back();
      if (!oracle.contains(key)) {
        EXPECT_THROW(q.remove(h), InvalidHandle);
        continue;
      }
      ASSERT_EQ(q.remove(h), key);
      oracle.remove(key);
    }
  }
  EXPECT_EQ(q.size(), oracle.size());
  EXPECT_TRUE(q.bitmap().consistent());
}

}  // namespace
}  // namespace eiffel
