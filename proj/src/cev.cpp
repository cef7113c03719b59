#include "extremes/cev.hpp"

#include "extremes/error.hpp"
#include "extremes/optim.hpp"
#include "extremes/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace extremes {

double laplace_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("Laplace quantile level must lie in (0, 1)");
  return p < 0.5 ? std::log(2.0 * p) : -std::log(2.0 * (1.0 - p));
}

double laplace_cdf(double y) {
  return y < 0.0 ? 0.5 * std::exp(y) : 1.0 - 0.5 * std::exp(-y);
}

double to_laplace(double x, int month, const MixedDistribution& md) {
  const double p = std::clamp(md.cdf(x, month), kLaplaceClip, 1.0 - kLaplaceClip);
  return laplace_quantile(p);
}

LaplaceSeries to_laplace(const SummarySeries& series, const MixedDistribution& md) {
  LaplaceSeries out;
  out.run_id = series.run_id;
  out.months = series.months;
  out.values.resize(series.size());
  for (std::size_t i = 0; i < series.size(); ++i)
    out.values[i] = to_laplace(series.values[i], series.months[i], md);
  return out;
}

double from_laplace(double y, int month, const MixedDistribution& md) {
  const double p = std::clamp(laplace_cdf(y), kLaplaceClip, 1.0 - kLaplaceClip);
  return md.quantile(p, month);
}

std::vector<double> cev_residuals(std::span<const double> x, std::span<const double> y,
                                  double beta0, double beta1) {
  if (x.size() != y.size()) throw std::invalid_argument("CEV pairs: size mismatch");
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (y[i] - beta0 * x[i]) / std::pow(x[i], beta1);
  return z;
}

double cev_profile_negloglik(std::span<const double> x, std::span<const double> y, double beta0,
                             double beta1, double* mu, double* sigma) {
  const std::size_t n = x.size();
  double sum_log_x = 0.0;
  double mean = 0.0;
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    sum_log_x += lx;
    r[i] = (y[i] - beta0 * x[i]) * std::exp(-beta1 * lx);
    mean += r[i];
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : r) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  // Floor keeps the comonotone corner (zero residual spread) finite.
  var = std::max(var, 1e-300);
  if (mu) *mu = mean;
  if (sigma) *sigma = std::sqrt(var);
  const double nd = static_cast<double>(n);
  return beta1 * sum_log_x + 0.5 * nd * std::log(var) +
         0.5 * nd * (1.0 + std::log(2.0 * std::numbers::pi));
}

double silverman_bandwidth(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 2) return 0.0;
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n - 1));
  const double iqr = empirical_quantile(s, 0.75) - empirical_quantile(s, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

CEVModel fit_cev_pairs(std::span<const double> x, std::span<const double> y, double q,
                       const CEVFitOptions& options) {
  if (x.size() != y.size()) throw std::invalid_argument("CEV pairs: size mismatch");
  if (!(q > 0.0)) throw std::domain_error("CEV conditioning level must be positive");
  for (double v : x)
    if (!(v > q)) throw std::invalid_argument("CEV pairs: conditioning values must exceed q");
  if (x.size() < options.min_pairs)
    throw FitError("CEV fit: " + std::to_string(x.size()) + " pairs above q, need " +
                   std::to_string(options.min_pairs));

  auto f = [&](std::span<const double> p) {
    if (!(p[0] >= 0.0 && p[0] <= 1.0)) return std::numeric_limits<double>::infinity();
    if (!(p[1] >= options.beta1_lower && p[1] <= options.beta1_upper))
      return std::numeric_limits<double>::infinity();
    return cev_profile_negloglik(x, y, p[0], p[1]);
  };
  optim::SimplexOptions so;
  so.f_tol = 1e-12;
  so.x_tol = 1e-9;
  so.max_iterations = 2000;

  auto rng = make_stream(options.seed, "cev_fit");
  std::uniform_real_distribution<double> b0(0.05, 0.95);
  std::uniform_real_distribution<double> b1(-0.5, 0.8);

  auto best = optim::nelder_mead(f, {0.5, 0.2}, {0.1, 0.1}, so);
  bool converged = best.converged;
  for (int r = 0; r < options.restarts; ++r) {
    auto trial = optim::nelder_mead(f, {b0(rng), b1(rng)}, {0.1, 0.1}, so);
    converged = converged || trial.converged;
    if (trial.value < best.value) best = std::move(trial);
  }
  if (!converged || !std::isfinite(best.value))
    throw FitError("CEV fit did not converge (negloglik " + std::to_string(best.value) + ")");

  CEVModel model;
  model.beta0 = best.x[0];
  model.beta1 = best.x[1];
  model.q_threshold = q;
  model.negloglik = cev_profile_negloglik(x, y, model.beta0, model.beta1, &model.nuisance_mu,
                                          &model.nuisance_sigma);
  model.residuals = cev_residuals(x, y, model.beta0, model.beta1);
  model.kde_bandwidth = silverman_bandwidth(model.residuals);
  return model;
}

CEVModel fit_cev(const LaplaceSeries& series, const CEVFitOptions& options) {
  if (!(options.q_prob > 0.0 && options.q_prob < 1.0))
    throw std::invalid_argument("q_prob must lie in (0, 1)");
  if (series.values.size() < 2) throw FitError("CEV fit: series too short");
  std::vector<double> sorted = series.values;
  std::sort(sorted.begin(), sorted.end());
  const double q = empirical_quantile(sorted, options.q_prob);
  if (!(q > 0.0)) throw FitError("CEV fit: conditioning quantile is not positive on the Laplace scale");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i + 1 < series.values.size(); ++i) {
    if (series.values[i] > q) {
      x.push_back(series.values[i]);
      y.push_back(series.values[i + 1]);
    }
  }
  CEVModel model = fit_cev_pairs(x, y, q, options);
  model.q_prob = options.q_prob;
  return model;
}

double sample_residual(const CEVModel& model, Rng& rng) {
  if (model.residuals.empty()) throw std::logic_error("CEV model has no residuals");
  std::uniform_int_distribution<std::size_t> pick(0, model.residuals.size() - 1);
  const double z = model.residuals[pick(rng)];
  if (model.kde_bandwidth <= 0.0) return z;
  std::normal_distribution<double> noise(0.0, model.kde_bandwidth);
  return z + noise(rng);
}

std::vector<double> simulate_chain(const CEVModel& model, double y0, int steps, Rng& rng) {
  if (!(y0 > model.q_threshold))
    throw std::domain_error("chain start must exceed the conditioning level");
  if (steps < 0) throw std::invalid_argument("steps must be nonnegative");
  std::vector<double> chain;
  chain.reserve(static_cast<std::size_t>(steps) + 1);
  chain.push_back(y0);
  double y = y0;
  for (int j = 0; j < steps; ++j) {
    if (y <= 0.0 && model.beta1 != 0.0) break;
    const double z = sample_residual(model, rng);
    const double scale = model.beta1 == 0.0 ? 1.0 : std::pow(y, model.beta1);
    y = model.beta0 * y + scale * z;
    chain.push_back(y);
  }
  return chain;
}

bool persists_above(std::span<const double> chain, double level) {
  for (std::size_t j = 0; j + 1 < chain.size(); ++j)
    if (chain[j] > level && chain[j + 1] > level) return true;
  return false;
}

std::vector<BandPoint> cev_band(const CEVModel& model, double x_max, int n_points, double level) {
  if (model.residuals.empty()) throw std::logic_error("CEV model has no residuals");
  if (n_points < 1) throw std::invalid_argument("band needs at least one point");
  std::vector<double> z = model.residuals;
  std::sort(z.begin(), z.end());
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(z.size());
  const double z_lo = empirical_quantile(z, (1.0 - level) / 2.0);
  const double z_hi = empirical_quantile(z, 1.0 - (1.0 - level) / 2.0);
  const double x_lo = model.q_threshold;
  const double hi = std::max(x_max, x_lo * (1.0 + 1e-9) + 1e-9);
  std::vector<BandPoint> band(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    const double x = x_lo + (hi - x_lo) * static_cast<double>(i + 1) / n_points;
    const double s = std::pow(x, model.beta1);
    band[static_cast<std::size_t>(i)] = {x, model.beta0 * x + s * mean, model.beta0 * x + s * z_lo,
                                         model.beta0 * x + s * z_hi};
  }
  return band;
}

} // namespace extremes
