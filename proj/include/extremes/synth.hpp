#pragma once

#include "extremes/ingest.hpp"
#include "extremes/summarise.hpp"
#include "extremes/threshold.hpp"

#include <cstdint>
#include <vector>

namespace extremes {

/// Synthetic ensemble with a known tail. The chosen order statistic of each
/// day equals a latent series that alternates sub-threshold gaps and
/// clusters of consecutive threshold exceedances:
///   - cluster sizes are 1 + Geometric with mean `mean_cluster_size`,
///   - gaps are at least `min_gap` days, with mean set so that a fraction
///     `exceed_prob` of days lies in clusters,
///   - exceedance day values are u(m) + GP(sigma(m), xi(m)), independent,
///   - other days are uniform on (bulk_floor u(m), u(m)).
/// The remaining sites are placed below and above the latent value.
struct SynthSpec {
  int n_runs = 4;
  std::size_t n_days = 60225;
  std::size_t n_sites = 25;
  int order_k = 1;
  double exceed_prob = 0.05;
  MonthArray threshold{};
  MonthArray sigma{};
  MonthArray xi{};
  double mean_cluster_size = 1.0;
  int min_gap = 5;
  double bulk_floor = 0.0;
  Calendar calendar = Calendar::noleap();
  std::uint64_t seed = 1;

  /// Constant threshold, scale and shape in every month.
  static SynthSpec uniform_months(double u, double sigma, double xi);
};

/// Throws std::invalid_argument for inconsistent parameters.
void validate(const SynthSpec& spec);

SummarySeries generate_latent_series(const SynthSpec& spec, int run_index);
EnsembleRun expand_to_sites(const SummarySeries& latent, const SynthSpec& spec, int run_index);
std::vector<EnsembleRun> generate_ensemble(const SynthSpec& spec);

struct SynthTruth {
  double level = 0.0;
  MonthArray day_prob_by_month{};      // P(X_i > level) for a day of month m
  double mean_day_prob = 0.0;          // averaged over one calendar year
  double expected_event_days = 0.0;    // over `horizon` days
  double expected_persistent_clusters = 0.0;  // clusters with two consecutive days above level
  std::size_t horizon = 0;
  double theta = 1.0;                  // 1 / mean cluster size
};

/// Closed-form event probabilities of the generator at `level` over the
/// first `horizon` days (0 = n_days). The persistence count treats a whole
/// cluster as lying in the month of its first day.
SynthTruth synth_truth(const SynthSpec& spec, double level, std::size_t horizon = 0);

} // namespace extremes
