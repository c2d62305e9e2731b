#include "eiffel/sched/shaper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eiffel/errors.hpp"

namespace eiffel {

TimeNs transmission_ns(std::uint32_t size, double rate_Bps) {
  if (!(rate_Bps > 0.0)) throw ConfigError("rate must be positive");
  return static_cast<TimeNs>(std::ceil(static_cast<double>(size) * static_cast<double>(kNsPerSec) / rate_Bps));
}

TimeNs compute_timestamp(TimeNs& last_ts, std::uint32_t size, double rate_Bps, TimeNs now) {
  const TimeNs ts = std::max(now, last_ts) + transmission_ns(size, rate_Bps);
  last_ts = ts;
  return ts;
}

Shaper::Shaper(const ShaperConfig& cfg) : cfg_(cfg), q_(cfg.num_buckets) {
  if (cfg.granularity_ns == 0 || cfg.num_buckets == 0) throw ConfigError("shaper needs buckets and granularity");
}

void Shaper::insert(const Packet& p, TimeNs ts, StageRef next_stage, TimeNs now) {
  if (ts > now + cfg_.horizon_ns()) {
    throw HorizonError("shaper timestamp " + std::to_string(ts) + " beyond horizon at " + std::to_string(now));
  }
  const Rank cur = now / cfg_.granularity_ns;
  if (q_.empty()) q_.rebase(cur);
  const Rank key = std::max<Rank>(ts / cfg_.granularity_ns, q_.h_index());
  q_.insert(key, ShaperEntry{p, ts, next_stage});
}

}  // namespace eiffel
