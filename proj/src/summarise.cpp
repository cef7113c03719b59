#include "extremes/summarise.hpp"

#include "extremes/simd/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace extremes {

SummarySeries spatial_order_statistic(const EnsembleRun& run, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > run.n_sites())
    throw std::out_of_range("order k=" + std::to_string(k) + " outside 1.." +
                            std::to_string(run.n_sites()));
  SummarySeries s;
  s.run_id = run.run_id();
  s.order_k = k;
  s.values.resize(run.n_days());
  simd::kth_smallest_rows(run.values(), run.n_sites(), static_cast<std::size_t>(k), s.values);
  s.months.assign(run.months().begin(), run.months().end());
  return s;
}

std::vector<bool> event_indicator(const SummarySeries& series, double level) {
  if (std::isnan(level)) throw std::invalid_argument("event level must not be NaN");
  std::vector<bool> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = series.values[i] > level;
  return out;
}

std::size_t count_events(const SummarySeries& series, double level) {
  if (std::isnan(level)) throw std::invalid_argument("event level must not be NaN");
  return simd::count_above(series.values, level);
}

int order_for_at_least(int n_sites, int j) {
  if (j < 1 || j > n_sites) throw std::out_of_range("site count j outside 1..S");
  return n_sites - j + 1;
}

} // namespace extremes
