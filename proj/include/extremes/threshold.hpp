#pragma once

#include "extremes/summarise.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace extremes {

using MonthArray = std::array<double, 12>;

/// Month-varying tau-quantile threshold from asymmetric-Laplace maximum
/// likelihood. Index 0 holds January.
struct ThresholdModel {
  double tau = 0.95;
  MonthArray u_by_month{};
  MonthArray log_zeta_by_month{};
  double loglik = 0.0;
};

/// Smallest admissible log-scale. Below it ald_negloglik returns +inf, which
/// bounds the otherwise unbounded likelihood of a constant month.
inline constexpr double kMinLogZeta = -30.0;

/// Quantile check loss rho_tau(t) = t (tau - 1{t < 0}).
double check_loss(double t, double tau) noexcept;

/// Negative ALD log-likelihood of the series. `params` holds the 12 monthly
/// locations followed by the 12 monthly log-scales. Returns +inf for
/// log-scales below kMinLogZeta.
double ald_negloglik(std::span<const double> params, const SummarySeries& series, double tau);

/// Negative log-likelihood of one month's values at (u, log zeta).
double ald_negloglik_month(std::span<const double> x, double u, double log_zeta, double tau);

struct ThresholdOptions {
  double tau = 0.95;
  std::size_t min_per_month = 50;
  int restarts = 3;           // jittered restarts after the first descent
  int max_iterations = 500;
  double f_tol = 1e-8;
  std::uint64_t seed = 0x7468726573686f6cULL;
};

/// Fits u(m) and log zeta(m) month by month with a simplex search started at
/// the empirical tau-quantile. Throws FitError if a month has fewer than
/// min_per_month observations or no descent converges.
ThresholdModel fit_threshold(const SummarySeries& series, const ThresholdOptions& options = {});

/// u(month) for month in 1..12; throws std::out_of_range otherwise.
double threshold_at(const ThresholdModel& model, int month);

/// Empirical quantile with linear interpolation between order statistics
/// (plotting position (n-1)p). `sorted` must be ascending and non-empty.
double empirical_quantile(std::span<const double> sorted, double p);

/// Values grouped by calendar month (index 0 = January).
std::array<std::vector<double>, 12> group_by_month(const SummarySeries& series);

} // namespace extremes
