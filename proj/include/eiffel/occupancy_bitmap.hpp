#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "eiffel/ffs.hpp"

namespace eiffel {

// Hierarchical occupancy bits. Level 0 has one bit per bucket; every level
// above has one bit per word of the level below, set iff that word is
// nonzero. The top level is a single word, so locating the lowest set bucket
// costs one FFS per level.
class OccupancyBitmap {
 public:
  explicit OccupancyBitmap(std::size_t num_bits);

  [[nodiscard]] std::size_t size() const noexcept { return num_bits_; }
  [[nodiscard]] std::size_t depth() const noexcept { return levels_.size(); }

  void set(std::size_t i) noexcept {
    for (auto& level : levels_) {
      Word& w = level[i / kWordBits];
      const bool was_zero = w == 0;
      w |= Word{1} << (i % kWordBits);
      if (!was_zero) return;
      i /= kWordBits;
    }
  }

  void clear(std::size_t i) noexcept {
    for (auto& level : levels_) {
      Word& w = level[i / kWordBits];
      w &= ~(Word{1} << (i % kWordBits));
      if (w != 0) return;
      i /= kWordBits;
    }
  }

  [[nodiscard]] bool test(std::size_t i) const noexcept {
    return (levels_[0][i / kWordBits] >> (i % kWordBits)) & 1U;
  }

  [[nodiscard]] bool any() const noexcept { return levels_.back()[0] != 0; }

  // Lowest set bit; walks top-down, one word per level.
  [[nodiscard]] std::optional<std::size_t> first() const noexcept {
    std::size_t idx = 0;
    probes_ = 0;
    for (std::size_t k = levels_.size(); k-- > 0;) {
      const Word w = levels_[k][idx];
      ++probes_;
      if (w == 0) return std::nullopt;
      idx = idx * kWordBits + static_cast<std::size_t>(std::countr_zero(w));
    }
    return idx;
  }

  // Highest set bit.
  [[nodiscard]] std::optional<std::size_t> last() const noexcept {
    std::size_t idx = 0;
    probes_ = 0;
    for (std::size_t k = levels_.size(); k-- > 0;) {
      const Word w = levels_[k][idx];
      ++probes_;
      if (w == 0) return std::nullopt;
      idx = idx * kWordBits + (kWordBits - 1 - static_cast<std::size_t>(std::countl_zero(w)));
    }
    return idx;
  }

  // Words read by the most recent first()/last() call.
  [[nodiscard]] std::size_t last_probe_count() const noexcept { return probes_; }

  [[nodiscard]] const std::vector<Word>& level(std::size_t k) const { return levels_.at(k); }

  // Recomputes every summary level from the leaves and compares.
  [[nodiscard]] bool consistent() const;

 private:
  std::size_t num_bits_;
  std::vector<std::vector<Word>> levels_;
  mutable std::size_t probes_ = 0;
};

}  // namespace eiffel
