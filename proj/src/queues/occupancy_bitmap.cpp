#include "eiffel/occupancy_bitmap.hpp"

#include "eiffel/errors.hpp"

namespace eiffel {

OccupancyBitmap::OccupancyBitmap(std::size_t num_bits) : num_bits_(num_bits) {
  if (num_bits == 0) throw ConfigError("bitmap needs at least one bucket");
  std::size_t words = (num_bits + kWordBits - 1) / kWordBits;
  levels_.emplace_back(words, Word{0});
  while (words > 1) {
    words = (words + kWordBits - 1) / kWordBits;
    levels_.emplace_back(words, Word{0});
  }
}

bool OccupancyBitmap::consistent() const {
  for (std::size_t k = 1; k < levels_.size(); ++k) {
    const auto& below = levels_[k - 1];
    const auto& here = levels_[k];
    for (std::size_t j = 0; j < below.size(); ++j) {
      const bool child_nonzero = below[j] != 0;
      const bool bit = (here[j / kWordBits] >> (j % kWordBits)) & 1U;
      if (child_nonzero != bit) return false;
    }
    // Bits past the last child word must stay clear.
    for (std::size_t j = below.size(); j < here.size() * kWordBits; ++j) {
      if ((here[j / kWordBits] >> (j % kWordBits)) & 1U) return false;
    }
  }
  const auto& leaves = levels_[0];
  for (std::size_t i = num_bits_; i < leaves.size() * kWordBits; ++i) {
    if ((leaves[i / kWordBits] >> (i % kWordBits)) & 1U) return false;
  }
  return true;
}

}  // namespace eiffel
