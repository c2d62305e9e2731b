#pragma once

#include <bit>
#include <cstdint>
#include <optional>

namespace eiffel {

using Word = std::uint64_t;
inline constexpr unsigned kWordBits = 64;

// Lowest set bit of `word`. Lowest index is highest priority throughout.
[[nodiscard]] constexpr std::optional<unsigned> find_first_set(Word word) noexcept {
  if (word == 0) return std::nullopt;
  return static_cast<unsigned>(std::countr_zero(word));
}

// Highest set bit, used by max-oriented structures.
[[nodiscard]] constexpr std::optional<unsigned> find_last_set(Word word) noexcept {
  if (word == 0) return std::nullopt;
  return static_cast<unsigned>(kWordBits - 1 - std::countl_zero(word));
}

}  // namespace eiffel
