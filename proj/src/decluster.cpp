#include "extremes/decluster.hpp"

#include <cmath>
#include <stdexcept>

namespace extremes {

std::array<std::size_t, 12> ClusterSet::clusters_by_month() const {
  std::array<std::size_t, 12> counts{};
  for (int m : maxima_months) ++counts[static_cast<std::size_t>(m - 1)];
  return counts;
}

std::vector<std::vector<std::size_t>> group_runs(std::span<const std::size_t> positions,
                                                 int run_length) {
  if (run_length < 1) throw std::invalid_argument("run length must be >= 1");
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < positions.size(); ++j) {
    const bool starts_new =
        j == 0 || positions[j] - positions[j - 1] - 1 >= static_cast<std::size_t>(run_length);
    if (starts_new) groups.emplace_back();
    groups.back().push_back(j);
  }
  return groups;
}

ClusterSet run_decluster(const SummarySeries& series, std::span<const double> day_thresholds,
                         int run_length) {
  if (run_length < 1) throw std::invalid_argument("run length must be >= 1");
  if (day_thresholds.size() != series.size())
    throw std::invalid_argument("one threshold per day required");

  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series.values[i] > day_thresholds[i]) positions.push_back(i);

  ClusterSet cs;
  cs.run_id = series.run_id;
  cs.run_length = run_length;
  cs.n_days = series.size();
  cs.n_exceedances = positions.size();

  for (const auto& group : group_runs(positions, run_length)) {
    Cluster c;
    std::size_t arg = positions[group.front()];
    for (std::size_t j : group) {
      const std::size_t i = positions[j];
      c.days.push_back(i + 1);
      c.values.push_back(series.values[i]);
      if (series.values[i] > series.values[arg]) arg = i;
    }
    cs.maxima.push_back(series.values[arg]);
    cs.maxima_days.push_back(arg + 1);
    cs.maxima_months.push_back(series.months[arg]);
    cs.clusters.push_back(std::move(c));
  }

  if (cs.n_exceedances > 0)
    cs.theta_hat = static_cast<double>(cs.clusters.size()) / static_cast<double>(cs.n_exceedances);
  cs.pi_star_hat = cs.n_days == 0
                       ? 0.0
                       : static_cast<double>(cs.clusters.size()) / static_cast<double>(cs.n_days);
  return cs;
}

ClusterSet run_decluster(const SummarySeries& series, const ThresholdModel& thresholds,
                         int run_length) {
  std::vector<double> per_day(series.size());
  for (std::size_t i = 0; i < series.size(); ++i)
    per_day[i] = threshold_at(thresholds, series.months[i]);
  return run_decluster(series, per_day, run_length);
}

double extremal_index(const ClusterSet& cs) {
  if (cs.n_exceedances == 0) throw std::domain_error("extremal index undefined: no exceedances");
  return static_cast<double>(cs.clusters.size()) / static_cast<double>(cs.n_exceedances);
}

double decluster_correction(double p_star, double theta) {
  if (!(p_star >= 0.0 && p_star <= 1.0)) throw std::domain_error("p_star must lie in [0, 1]");
  if (!(theta > 0.0 && theta <= 1.0)) throw std::domain_error("theta must lie in (0, 1]");
  if (theta == 1.0) return p_star;
  return -std::expm1(theta * std::log1p(-p_star));
}

double apply_correction(double p_star, double theta, Correction mode) {
  if (mode == Correction::power) return decluster_correction(p_star, theta);
  if (!(p_star >= 0.0)) throw std::domain_error("p_star must be nonnegative");
  if (!(theta > 0.0 && theta <= 1.0)) throw std::domain_error("theta must lie in (0, 1]");
  return theta * p_star;
}

} // namespace extremes
