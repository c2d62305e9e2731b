#include <cmath>
#include <cstdlib>

#include "eiffel/approx_window.hpp"

namespace eiffel {
namespace {

double mean_abs(const std::map<long long, std::uint64_t>& hist) {
  std::uint64_t n = 0;
  double sum = 0.0;
  for (const auto& [err, count] : hist) {
    n += count;
    sum += static_cast<double>(std::llabs(err)) * static_cast<double>(count);
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace

double ApproxStats::mean_abs_fetch_error() const { return mean_abs(fetch_error); }

double ApproxStats::mean_abs_estimate_error() const { return mean_abs(estimate_error); }

long long ApproxStats::p99_abs_fetch_error() const {
  std::map<long long, std::uint64_t> abs_hist;
  std::uint64_t n = 0;
  for (const auto& [err, count] : fetch_error) {
    abs_hist[std::llabs(err)] += count;
    n += count;
  }
  if (n == 0) return 0;
  const auto target = static_cast<std::uint64_t>(std::ceil(0.99 * static_cast<double>(n)));
  std::uint64_t seen = 0;
  for (const auto& [err, count] : abs_hist) {
    seen += count;
    if (seen >= target) return err;
  }
  return abs_hist.rbegin()->first;
}

double ApproxStats::mean_search_len() const {
  return lookups == 0 ? 0.0 : static_cast<double>(search_steps) / static_cast<double>(lookups);
}

}  // namespace eiffel
