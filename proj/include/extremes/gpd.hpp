#pragma once

#include "extremes/decluster.hpp"
#include "extremes/rng.hpp"
#include "extremes/threshold.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace extremes {

// Generalized Pareto distribution of excesses z = x - u > 0.
// |xi| below kXiZero is evaluated on the exponential branch.
inline constexpr double kXiZero = 1e-10;

/// H(z; sigma, xi) = 1 - (1 + xi z / sigma)_+^(-1/xi). Zero for z <= 0 and
/// one beyond the upper endpoint when xi < 0.
double gp_cdf(double z, double sigma, double xi);
/// 1 - H, computed without cancellation.
double gp_survival(double z, double sigma, double xi);
/// Inverse of gp_cdf for p in [0, 1). Throws std::domain_error otherwise.
double gp_quantile(double p, double sigma, double xi);
/// Log density; -inf outside the support.
double gp_logpdf(double z, double sigma, double xi);
/// -log(1 - H(z)), which is standard exponential when z ~ GP(sigma, xi).
double gp_to_exponential(double z, double sigma, double xi);
double gp_sample(Rng& rng, double sigma, double xi);

enum class ShapeMode { constant, by_month };

struct GPModel {
  MonthArray log_sigma_by_month{};
  ShapeMode shape_mode = ShapeMode::constant;
  std::vector<double> xi{0.0};  // 1 value (constant) or 12 (by_month)
  ThresholdModel thresholds;
  double loglik = 0.0;

  double sigma(int month) const;
  double shape(int month) const;
};

struct GPFitOptions {
  std::size_t min_per_month = 10;  // enforced for by_month shapes
  double xi_lower = -0.9;
  double xi_upper = 2.0;
  int max_iterations = 2000;
  int restarts = 2;
};

/// Log-likelihood of excesses `z` observed in `months` (1..12).
double gp_loglik(const GPModel& model, std::span<const double> z, std::span<const int> months);

/// Probability-weighted-moment estimates (sigma, xi) of a GP sample.
std::pair<double, double> gp_pwm(std::span<const double> z);

/// Maximum likelihood fit to raw excesses with month-varying log-scale and a
/// constant or month-varying shape in [xi_lower, xi_upper].
GPModel fit_gp_excesses(std::span<const double> z, std::span<const int> months,
                        const ThresholdModel& thresholds, ShapeMode mode,
                        const GPFitOptions& options = {});

/// Fits the cluster maxima of `cs`, excesses measured from u(month of maximum).
GPModel fit_gp(const ClusterSet& cs, const ThresholdModel& thresholds, ShapeMode mode,
               const GPFitOptions& options = {});

/// Continuous version of the empirical CDF: right-continuous at the smallest
/// value, linear between distinct sample values, and exactly invertible on
/// its range.
class InterpolatedEcdf {
public:
  InterpolatedEcdf() = default;
  explicit InterpolatedEcdf(std::vector<double> sample);

  double cdf(double y) const;
  double quantile(double p) const;
  bool empty() const noexcept { return knots_.empty(); }
  std::span<const double> knots() const noexcept { return knots_; }

private:
  std::vector<double> knots_;  // distinct sorted values
  std::vector<double> probs_;  // fraction of the sample <= knot
};

enum class BulkMode { pooled, by_month };

/// Bulk/tail distribution of a summary series: below u(m) the bulk empirical
/// CDF rescaled to reach 1 - pi at u(m), above it 1 - pi (1 - H(y - u(m))).
class MixedDistribution {
public:
  MixedDistribution(std::span<const double> values, std::span<const std::uint8_t> months,
                    double pi, GPModel gp, BulkMode mode = BulkMode::pooled);

  double cdf(double y, int month) const;
  double quantile(double p, int month) const;

  double pi() const noexcept { return pi_; }
  BulkMode bulk_mode() const noexcept { return mode_; }
  const GPModel& gp() const noexcept { return gp_; }
  const ThresholdModel& thresholds() const noexcept { return gp_.thresholds; }
  const InterpolatedEcdf& bulk(int month) const;

private:
  double pi_;
  GPModel gp_;
  BulkMode mode_;
  InterpolatedEcdf pooled_;
  std::array<InterpolatedEcdf, 12> by_month_;
  MonthArray bulk_at_threshold_{};
};

double mixed_cdf(const MixedDistribution& md, double y, int month);
double mixed_quantile(const MixedDistribution& md, double p, int month);

struct QQPoint {
  double theoretical;
  double empirical;
};

/// Cluster-maximum excesses mapped to standard exponential margins under the
/// fitted model, sorted, against plotting positions -log(1 - j/(n+1)).
std::vector<QQPoint> qq_exponential(const GPModel& model, const ClusterSet& cs);

struct Envelope {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Pointwise (alpha/2, 1-alpha/2) envelope of sorted exponential-margin
/// values from `replicates` parametric bootstrap samples of the fitted model
/// (same months as the observed cluster maxima).
Envelope qq_envelope(const GPModel& model, const ClusterSet& cs, int replicates,
                     std::uint64_t seed, double alpha = 0.05);

} // namespace extremes
