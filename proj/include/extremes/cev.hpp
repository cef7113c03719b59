#pragma once

#include "extremes/gpd.hpp"
#include "extremes/rng.hpp"
#include "extremes/summarise.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace extremes {

/// Probability clipping applied before mapping to Laplace margins.
inline constexpr double kLaplaceClip = 1e-10;

/// Standard Laplace quantile: log(2p) below the median, -log(2(1-p)) above.
double laplace_quantile(double p);
double laplace_cdf(double y);

struct LaplaceSeries {
  int run_id = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> months;
};

/// Probability integral transform through the mixed distribution (clipped to
/// [eps, 1-eps]) followed by the Laplace quantile function.
LaplaceSeries to_laplace(const SummarySeries& series, const MixedDistribution& md);
double to_laplace(double x, int month, const MixedDistribution& md);
/// Inverse of to_laplace on the unclipped range.
double from_laplace(double y, int month, const MixedDistribution& md);

struct CEVModel {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double q_threshold = 0.0;   // conditioning level on the Laplace scale
  double q_prob = 0.9;
  std::vector<double> residuals;
  double nuisance_mu = 0.0;   // Gaussian working-model location, unused downstream
  double nuisance_sigma = 1.0;
  double kde_bandwidth = 0.0;
  double negloglik = 0.0;
};

struct CEVFitOptions {
  double q_prob = 0.90;
  std::size_t min_pairs = 100;
  int restarts = 5;
  double beta1_lower = -5.0;
  double beta1_upper = 1.0 - 1e-6;
  std::uint64_t seed = 0x6365766669747321ULL;
};

/// Residuals z_i = (y_i - beta0 x_i) / x_i^beta1 of conditioning pairs.
std::vector<double> cev_residuals(std::span<const double> x, std::span<const double> y,
                                  double beta0, double beta1);

/// Negative Gaussian working log-likelihood of y | x ~ N(beta0 x + mu x^b1,
/// sigma^2 x^(2 b1)) with (mu, sigma) profiled out; writes them if requested.
double cev_profile_negloglik(std::span<const double> x, std::span<const double> y,
                             double beta0, double beta1, double* mu = nullptr,
                             double* sigma = nullptr);

/// Silverman's rule 0.9 min(sd, IQR/1.34) n^(-1/5).
double silverman_bandwidth(std::span<const double> sample);

/// Fits the dependence parameters on explicit pairs with every x > q > 0.
CEVModel fit_cev_pairs(std::span<const double> x, std::span<const double> y, double q,
                       const CEVFitOptions& options = {});

/// Conditions on days whose Laplace value exceeds the empirical q_prob
/// quantile and fits on the lag-one pairs (x_i, x_{i+1}).
CEVModel fit_cev(const LaplaceSeries& series, const CEVFitOptions& options = {});

/// Draw from the kernel density estimate of the residuals: a stored residual
/// chosen uniformly plus N(0, bandwidth^2) noise.
double sample_residual(const CEVModel& model, Rng& rng);

/// Y_0 = y0, Y_{j+1} = beta0 Y_j + Y_j^beta1 Z_{j+1} for j < steps. If some
/// Y_j <= 0 while beta1 != 0 the power is undefined and the chain ends at Y_j.
/// Throws std::domain_error for y0 <= q_threshold.
std::vector<double> simulate_chain(const CEVModel& model, double y0, int steps, Rng& rng);

/// True when `chain` exceeds `level` on at least two consecutive steps.
bool persists_above(std::span<const double> chain, double level);

struct BandPoint {
  double x;
  double mean;
  double lower;
  double upper;
};

/// Fitted conditional mean beta0 x + x^beta1 mean(Z) and the residual-quantile
/// predictive band on `n_points` Laplace-scale values in (q, x_max].
std::vector<BandPoint> cev_band(const CEVModel& model, double x_max, int n_points,
                                double level = 0.95);

} // namespace extremes
