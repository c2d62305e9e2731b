#pragma once

// Reference min-queue for differential tests: a sorted multiset keyed by
// (rank, insertion order). Deliberately naive; shares no code with the
// queues under test.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace eiffel::testing {

class SortedOracle {
 public:
  using Key = std::uint64_t;

  void insert(std::uint64_t rank, Key key) {
    if (where_.count(key) != 0) throw std::logic_error("duplicate oracle entry");
    Item item{rank, seq_++, key};
    items_.insert(item);
    where_[key] = item;
  }

  std::optional<std::pair<std::uint64_t, Key>> pop_min() {
    if (items_.empty()) return std::nullopt;
    auto it = items_.begin();
    auto out = std::pair{std::get<0>(*it), std::get<2>(*it)};
    where_.erase(std::get<2>(*it));
    items_.erase(it);
    return out;
  }

  [[nodiscard]] std::optional<std::uint64_t> min_rank() const {
    if (items_.empty()) return std::nullopt;
    return std::get<0>(*items_.begin());
  }

  void remove(Key key) {
    items_.erase(where_.at(key));
    where_.erase(key);
  }

  // Re-stamps an item as if it were re-inserted now (moves it behind equals).
  void restamp(Key key) {
    const auto rank = std::get<0>(where_.at(key));
    items_.erase(where_.at(key));
    where_.erase(key);
    insert(rank, key);
  }

  [[nodiscard]] bool contains(Key key) const { return where_.count(key) != 0; }
  [[nodiscard]] std::size_t size() const { return items_.size(); }

 private:
  using Item = std::tuple<std::uint64_t, std::uint64_t, Key>;
  std::set<Item> items_;
  std::map<Key, Item> where_;
  std::uint64_t seq_ = 0;
};

}  // namespace eiffel::testing
