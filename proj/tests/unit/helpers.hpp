#pragma once

#include "extremes/ensemble.hpp"
#include "extremes/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace testing {

using namespace extremes;

inline SummarySeries make_series(std::vector<double> values, const Calendar& cal = Calendar::noleap()) {
  SummarySeries s;
  s.months = cal.fold(values.size());
  s.values = std::move(values);
  return s;
}

inline ThresholdModel constant_threshold(double u, double tau = 0.95) {
  ThresholdModel t;
  t.tau = tau;
  t.u_by_month.fill(u);
  t.log_zeta_by_month.fill(0.0);
  return t;
}

inline GPModel constant_gp(double u, double sigma, double xi) {
  GPModel g;
  g.thresholds = constant_threshold(u);
  g.log_sigma_by_month.fill(std::log(sigma));
  g.shape_mode = ShapeMode::constant;
  g.xi = {xi};
  return g;
}

/// Cluster set of singleton clusters with the given maxima spread over days.
inline ClusterSet singleton_clusters(const std::vector<double>& maxima, const std::vector<int>& months,
                                     std::size_t n_days) {
  ClusterSet cs;
  cs.n_days = n_days;
  for (std::size_t i = 0; i < maxima.size(); ++i) {
    Cluster c;
    c.days = {i + 1};
    c.values = {maxima[i]};
    cs.clusters.push_back(c);
    cs.maxima.push_back(maxima[i]);
    cs.maxima_days.push_back(i + 1);
    cs.maxima_months.push_back(months[i]);
  }
  cs.n_exceedances = maxima.size();
  if (!maxima.empty()) cs.theta_hat = 1.0;
  cs.pi_star_hat = static_cast<double>(maxima.size()) / static_cast<double>(n_days);
  return cs;
}

/// Emulator whose margins are known exactly: bulk uniform on (0, u), GP(sigma,
/// xi) excesses above u in every month, `n_clusters` singleton clusters spread
/// evenly over the calendar.
inline RunEmulator exact_emulator(double u, double sigma, double xi, double pi, std::size_t n_days,
                                  std::size_t n_clusters, std::uint64_t seed = 5) {
  const Calendar cal = Calendar::noleap();
  auto rng = make_stream(seed, "exact_emulator");
  std::uniform_real_distribution<double> bulk(0.0, u);
  std::vector<double> series(n_days);
  for (auto& v : series) v = bulk(rng);

  const auto months = cal.fold(n_days);
  std::vector<double> maxima;
  std::vector<int> max_months;
  for (std::size_t c = 0; c < n_clusters; ++c) {
    const std::size_t day = (c * n_days) / std::max<std::size_t>(n_clusters, 1);
    maxima.push_back(u + 1.0);
    max_months.push_back(months[day]);
  }
  ClusterSet cs = singleton_clusters(maxima, max_months, n_days);
  cs.pi_star_hat = pi;

  GPModel gp = constant_gp(u, sigma, xi);
  RunEmulator em{.run_id = 1,
                 .question = Question::q1,
                 .order_k = 1,
                 .calendar = cal,
                 .series = series,
                 .clusters = cs,
                 .mixed = MixedDistribution(series, months, pi, gp),
                 .cev = std::nullopt};
  return em;
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

/// Two-sample Kolmogorov-Smirnov distance.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

} // namespace testing
