#pragma once

#include <stdexcept>
#include <string>

namespace eiffel {

// Rank outside the range a queue was built for.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Handle that no longer refers to a live element.
class InvalidHandle : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Operation called in a state that violates its precondition.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Rank below the current window of a circular queue.
class StaleRankError : public RangeError {
 public:
  using RangeError::RangeError;
};

// Timestamp further ahead than a shaper or timing wheel can hold.
class HorizonError : public RangeError {
 public:
  using RangeError::RangeError;
};

// Invalid scheduler, workload or benchmark configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eiffel
