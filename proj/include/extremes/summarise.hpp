#pragma once

#include "extremes/ingest.hpp"

#include <cstdint>
#include <vector>

namespace extremes {

/// Daily spatial order statistic of one run.
struct SummarySeries {
  int run_id = 0;
  int order_k = 1;                   // k-th smallest site value, 1-based
  std::vector<double> values;        // one per day
  std::vector<std::uint8_t> months;  // 1..12, one per day

  std::size_t size() const noexcept { return values.size(); }
};

/// k-th smallest site value on each day; k = 1 is the spatial minimum.
/// Throws std::out_of_range unless 1 <= k <= S.
SummarySeries spatial_order_statistic(const EnsembleRun& run, int k);

/// Strict exceedance indicator: element i is true iff values[i] > level.
std::vector<bool> event_indicator(const SummarySeries& series, double level);

/// Number of days with values[i] > level.
std::size_t count_events(const SummarySeries& series, double level);

/// Order k that turns "at least j of S sites exceed v" into W^(k) > v.
int order_for_at_least(int n_sites, int j);

} // namespace extremes
