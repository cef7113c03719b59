#include "extremes/threshold.hpp"

#include "extremes/error.hpp"
#include "extremes/optim.hpp"
#include "extremes/rng.hpp"
#include "extremes/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace extremes {

double check_loss(double t, double tau) noexcept {
  return t < 0.0 ? (tau - 1.0) * t : tau * t;
}

double ald_negloglik_month(std::span<const double> x, double u, double log_zeta, double tau) {
  if (x.empty()) return 0.0;
  if (!(log_zeta >= kMinLogZeta) || !std::isfinite(u))
    return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(x.size());
  const double loss = simd::pinball_sum(x, u, tau);
  return n * (log_zeta - std::log(tau * (1.0 - tau))) + loss * std::exp(-log_zeta);
}

std::array<std::vector<double>, 12> group_by_month(const SummarySeries& series) {
  std::array<std::vector<double>, 12> groups;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const int m = series.months[i];
    if (m < 1 || m > 12) throw std::invalid_argument("month index outside 1..12");
    groups[m - 1].push_back(series.values[i]);
  }
  return groups;
}

double ald_negloglik(std::span<const double> params, const SummarySeries& series, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  if (params.size() != 24) throw std::invalid_argument("ALD parameters: expected 24 values");
  const auto groups = group_by_month(series);
  double total = 0.0;
  for (int m = 0; m < 12; ++m) total += ald_negloglik_month(groups[m], params[m], params[12 + m], tau);
  return total;
}

double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("empirical_quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

struct MonthFit {
  double u;
  double log_zeta;
  double negloglik;
};

MonthFit fit_month(std::span<const double> x, const ThresholdOptions& opt, int month) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double q = empirical_quantile(sorted, opt.tau);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double mad = 0.0;
  for (double v : x) mad += std::abs(v - mean);
  mad /= static_cast<double>(x.size());
  const double scale = mad > 0.0 ? mad : 1e-8 * (1.0 + std::abs(q));

  auto objective = [&](std::span<const double> p) {
    return ald_negloglik_month(x, p[0], p[1], opt.tau);
  };
  optim::SimplexOptions so;
  so.f_tol = opt.f_tol;
  so.max_iterations = opt.max_iterations;
  so.x_tol = 1e-9 * (1.0 + std::abs(q));

  auto rng = make_stream(opt.seed, "threshold", static_cast<std::uint64_t>(month));
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);

  auto best = optim::nelder_mead(objective, {q, std::log(scale)}, {0.5 * scale, 0.5}, so);
  bool any_converged = best.converged;
  for (int r = 0; r < opt.restarts; ++r) {
    std::vector<double> start = {best.x[0] + jitter(rng) * scale, best.x[1] + jitter(rng)};
    if (!std::isfinite(objective(start))) start = best.x;
    auto trial = optim::nelder_mead(objective, start, {0.25 * scale, 0.25}, so);
    any_converged = any_converged || trial.converged;
    if (trial.value < best.value) best = std::move(trial);
  }
  if (!any_converged)
    throw FitError("threshold fit for month " + std::to_string(month) +
                   " did not converge (negloglik " + std::to_string(best.value) + ", u " +
                   std::to_string(best.x[0]) + ")");
  return {best.x[0], best.x[1], best.value};
}

} // namespace

ThresholdModel fit_threshold(const SummarySeries& series, const ThresholdOptions& options) {
  if (!(options.tau > 0.0 && options.tau < 1.0))
    throw std::invalid_argument("tau must lie in (0, 1)");
  const auto groups = group_by_month(series);
  for (int m = 0; m < 12; ++m)
    if (groups[m].size() < options.min_per_month)
      throw FitError("threshold fit: month " + std::to_string(m + 1) + " has " +
                     std::to_string(groups[m].size()) + " observations, need " +
                     std::to_string(options.min_per_month));

  ThresholdModel model;
  model.tau = options.tau;
  double negloglik = 0.0;
  for (int m = 0; m < 12; ++m) {
    const auto fit = fit_month(groups[m], options, m + 1);
    model.u_by_month[m] = fit.u;
    model.log_zeta_by_month[m] = fit.log_zeta;
    negloglik += fit.negloglik;
  }
  model.loglik = -negloglik;
  return model;
}

double threshold_at(const ThresholdModel& model, int month) {
  if (month < 1 || month > 12) throw std::out_of_range("month must lie in 1..12");
  return model.u_by_month[month - 1];
}

} // namespace extremes
