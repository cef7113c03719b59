#pragma once

#include "extremes/summarise.hpp"
#include "extremes/threshold.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace extremes {

struct Cluster {
  std::vector<std::size_t> days;  // 1-based, increasing
  std::vector<double> values;
};

/// Run-declustered threshold exceedances of one summary series.
struct ClusterSet {
  int run_id = 0;
  int run_length = 3;
  std::size_t n_days = 0;
  std::vector<Cluster> clusters;
  std::vector<double> maxima;             // one per cluster
  std::vector<std::size_t> maxima_days;   // 1-based; earliest day on ties
  std::vector<int> maxima_months;         // 1..12
  std::size_t n_exceedances = 0;
  std::optional<double> theta_hat;        // empty when there are no exceedances
  double pi_star_hat = 0.0;               // clusters / days

  std::size_t n_clusters() const noexcept { return clusters.size(); }
  /// Cluster counts by month of the cluster maximum (index 0 = January).
  std::array<std::size_t, 12> clusters_by_month() const;
};

/// Groups the 0-based exceedance positions into clusters: a new cluster
/// starts when at least `run_length` non-exceedances separate two
/// consecutive exceedances. Returns, per cluster, indices into `positions`.
std::vector<std::vector<std::size_t>> group_runs(std::span<const std::size_t> positions,
                                                 int run_length);

/// Exceedances are days with x_i > u(m_i). Throws std::invalid_argument for
/// run_length < 1.
ClusterSet run_decluster(const SummarySeries& series, const ThresholdModel& thresholds,
                         int run_length = 3);

/// Same as run_decluster with an explicit per-day threshold.
ClusterSet run_decluster(const SummarySeries& series, std::span<const double> day_thresholds,
                         int run_length = 3);

/// Inverse mean cluster size. Throws std::domain_error when empty.
double extremal_index(const ClusterSet& cs);

enum class Correction { power, multiplicative };

/// 1 - (1 - p_star)^theta. Requires p_star in [0,1] and theta in (0,1].
double decluster_correction(double p_star, double theta);

/// power: decluster_correction; multiplicative: theta * p_star (p_star >= 0).
double apply_correction(double p_star, double theta, Correction mode);

} // namespace extremes
