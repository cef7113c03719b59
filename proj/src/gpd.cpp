#include "extremes/gpd.hpp"

#include "extremes/error.hpp"
#include "extremes/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace extremes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("GP scale must be positive and finite");
}

// log(1 - H(z)); -inf beyond the upper endpoint.
double log_survival(double z, double sigma, double xi) {
  if (z <= 0.0) return 0.0;
  if (std::abs(xi) < kXiZero) return -z / sigma;
  const double t = xi * z / sigma;
  if (t <= -1.0) return -kInf;
  return -std::log1p(t) / xi;
}

} // namespace

double gp_cdf(double z, double sigma, double xi) {
  check_sigma(sigma);
  return -std::expm1(log_survival(z, sigma, xi));
}

double gp_survival(double z, double sigma, double xi) {
  check_sigma(sigma);
  return std::exp(log_survival(z, sigma, xi));
}

double gp_quantile(double p, double sigma, double xi) {
  check_sigma(sigma);
  if (!(p >= 0.0 && p < 1.0)) throw std::domain_error("GP quantile level must lie in [0, 1)");
  const double l = std::log1p(-p);
  if (std::abs(xi) < kXiZero) return -sigma * l;
  return sigma * std::expm1(-xi * l) / xi;
}

double gp_logpdf(double z, double sigma, double xi) {
  check_sigma(sigma);
  if (z < 0.0) return -kInf;
  if (std::abs(xi) < kXiZero) return -std::log(sigma) - z / sigma;
  const double t = xi * z / sigma;
  if (t <= -1.0) return -kInf;
  return -std::log(sigma) - (1.0 + 1.0 / xi) * std::log1p(t);
}

double gp_to_exponential(double z, double sigma, double xi) {
  check_sigma(sigma);
  return -log_survival(z, sigma, xi);
}

double gp_sample(Rng& rng, double sigma, double xi) {
  return gp_quantile(1.0 - uniform_open(rng), sigma, xi);
}

double GPModel::sigma(int month) const {
  if (month < 1 || month > 12) throw std::out_of_range("month must lie in 1..12");
  return std::exp(log_sigma_by_month[month - 1]);
}

double GPModel::shape(int month) const {
  if (month < 1 || month > 12) throw std::out_of_range("month must lie in 1..12");
  return shape_mode == ShapeMode::constant ? xi.at(0) : xi.at(month - 1);
}

double gp_loglik(const GPModel& model, std::span<const double> z, std::span<const int> months) {
  if (z.size() != months.size()) throw std::invalid_argument("one month per excess required");
  double total = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j)
    total += gp_logpdf(z[j], model.sigma(months[j]), model.shape(months[j]));
  return total;
}

std::pair<double, double> gp_pwm(std::span<const double> z) {
  if (z.size() < 2) throw FitError("GP moments need at least two excesses");
  std::vector<double> s(z.begin(), z.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double a0 = 0.0;
  double a1 = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    a0 += s[j];
    a1 += (1.0 - (static_cast<double>(j + 1) - 0.35) / n) * s[j];
  }
  a0 /= n;
  a1 /= n;
  const double d = a0 - 2.0 * a1;
  if (!(d > 0.0)) return {a0, 0.0};
  return {2.0 * a0 * a1 / d, 2.0 - a0 / d};
}

namespace {

double excess_nll(std::span<const double> z, double log_sigma, double xi) {
  if (z.empty()) return 0.0;
  const double sigma = std::exp(log_sigma);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) return kInf;
  double total = static_cast<double>(z.size()) * log_sigma;
  if (std::abs(xi) < kXiZero) {
    for (double v : z) total += v / sigma;
    return total;
  }
  const double a = xi / sigma;
  const double b = 1.0 + 1.0 / xi;
  for (double v : z) {
    const double t = a * v;
    if (t <= -1.0) return kInf;
    total += b * std::log1p(t);
  }
  return total;
}

// Feasible starting scale for shape xi given the largest excess.
double feasible_sigma(double sigma, double xi, double z_max) {
  if (xi < 0.0) sigma = std::max(sigma, -xi * z_max * 1.05);
  return std::max(sigma, 1e-12);
}

struct MonthExcesses {
  std::array<std::vector<double>, 12> z;
  std::array<double, 12> z_max{};
  std::vector<double> pooled;
};

MonthExcesses group_excesses(std::span<const double> z, std::span<const int> months) {
  MonthExcesses g;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const int m = months[j];
    if (m < 1 || m > 12) throw std::invalid_argument("month index outside 1..12");
    if (!(z[j] > 0.0) || !std::isfinite(z[j]))
      throw std::invalid_argument("GP excesses must be positive and finite");
    g.z[m - 1].push_back(z[j]);
    g.z_max[m - 1] = std::max(g.z_max[m - 1], z[j]);
    g.pooled.push_back(z[j]);
  }
  return g;
}

void check_not_degenerate(std::span<const double> z) {
  if (z.size() < 2) throw FitError("GP fit needs at least two excesses");
  const auto [lo, hi] = std::minmax_element(z.begin(), z.end());
  if (*lo == *hi) throw FitError("GP fit: all excesses are equal (zero variance)");
}

// Inner profile step: best log-scale for a fixed shape on one month.
std::pair<double, double> best_log_sigma(std::span<const double> z, double z_max, double xi,
                                         double mean) {
  const double start = std::log(feasible_sigma(mean * (1.0 - std::min(xi, 0.9)), xi, z_max));
  auto f = [&](std::span<const double> p) { return excess_nll(z, p[0], xi); };
  optim::SimplexOptions so;
  so.f_tol = 1e-13;
  so.x_tol = 1e-10;
  so.max_iterations = 400;
  auto r = optim::nelder_mead(f, {start}, 0.2, so);
  return {r.x[0], r.value};
}

GPModel fit_constant_shape(const MonthExcesses& g, const GPFitOptions& opt) {
  std::array<double, 12> means{};
  for (int m = 0; m < 12; ++m) {
    if (g.z[m].empty()) continue;
    means[m] = std::accumulate(g.z[m].begin(), g.z[m].end(), 0.0) /
               static_cast<double>(g.z[m].size());
  }
  MonthArray log_sigma{};
  auto profile = [&](double xi, MonthArray* out) {
    if (!(xi >= opt.xi_lower && xi <= opt.xi_upper)) return kInf;
    double total = 0.0;
    for (int m = 0; m < 12; ++m) {
      if (g.z[m].empty()) continue;
      auto [ls, v] = best_log_sigma(g.z[m], g.z_max[m], xi, means[m]);
      if (out) (*out)[m] = ls;
      total += v;
    }
    return total;
  };

  const auto [sigma0, xi_pwm] = gp_pwm(g.pooled);
  (void)sigma0;
  const double xi0 = std::clamp(xi_pwm, opt.xi_lower + 0.05, std::min(opt.xi_upper - 0.05, 0.8));
  auto f = [&](std::span<const double> p) { return profile(p[0], nullptr); };
  optim::SimplexOptions so;
  so.f_tol = 1e-11;
  so.x_tol = 1e-8;
  so.max_iterations = opt.max_iterations;

  auto best = optim::nelder_mead(f, {xi0}, 0.05, so);
  bool converged = best.converged;
  for (int r = 0; r < opt.restarts; ++r) {
    auto trial = optim::nelder_mead(f, best.x, 0.1 / (r + 1), so);
    converged = converged || trial.converged;
    if (trial.value < best.value) best = std::move(trial);
  }
  if (!converged || !std::isfinite(best.value))
    throw FitError("GP fit (constant shape) did not converge");

  const double xi = best.x[0];
  const double nll = profile(xi, &log_sigma);

  double fill = 0.0;
  int filled = 0;
  for (int m = 0; m < 12; ++m)
    if (!g.z[m].empty()) {
      fill += log_sigma[m];
      ++filled;
    }
  fill /= filled;
  for (int m = 0; m < 12; ++m)
    if (g.z[m].empty()) log_sigma[m] = fill;

  GPModel model;
  model.shape_mode = ShapeMode::constant;
  model.xi = {xi};
  model.log_sigma_by_month = log_sigma;
  model.loglik = -nll;
  return model;
}

std::pair<std::vector<double>, double> fit_one_month(std::span<const double> z, double z_max,
                                                     const GPFitOptions& opt, int month) {
  auto [s0, x0] = gp_pwm(z);
  x0 = std::clamp(x0, opt.xi_lower + 0.05, std::min(opt.xi_upper - 0.05, 0.8));
  s0 = feasible_sigma(s0, x0, z_max);
  auto f = [&](std::span<const double> p) {
    if (!(p[1] >= opt.xi_lower && p[1] <= opt.xi_upper)) return kInf;
    return excess_nll(z, p[0], p[1]);
  };
  optim::SimplexOptions so;
  so.f_tol = 1e-11;
  so.x_tol = 1e-8;
  so.max_iterations = opt.max_iterations;
  auto best = optim::nelder_mead(f, {std::log(s0), x0}, {0.2, 0.05}, so);
  bool converged = best.converged;
  for (int r = 0; r < opt.restarts; ++r) {
    auto trial = optim::nelder_mead(f, best.x, {0.1, 0.05}, so);
    converged = converged || trial.converged;
    if (trial.value < best.value) best = std::move(trial);
  }
  if (!converged || !std::isfinite(best.value))
    throw FitError("GP fit for month " + std::to_string(month) + " did not converge");
  return {best.x, best.value};
}

GPModel fit_month_shape(const MonthExcesses& g, const GPFitOptions& opt) {
  for (int m = 0; m < 12; ++m)
    if (g.z[m].size() < std::max<std::size_t>(opt.min_per_month, 2))
      throw FitError("GP fit: month " + std::to_string(m + 1) + " has " +
                     std::to_string(g.z[m].size()) + " cluster maxima, need " +
                     std::to_string(std::max<std::size_t>(opt.min_per_month, 2)));
  GPModel model;
  model.shape_mode = ShapeMode::by_month;
  model.xi.assign(12, 0.0);
  double nll = 0.0;
  for (int m = 0; m < 12; ++m) {
    check_not_degenerate(g.z[m]);
    auto [x, v] = fit_one_month(g.z[m], g.z_max[m], opt, m + 1);
    model.log_sigma_by_month[m] = x[0];
    model.xi[m] = x[1];
    nll += v;
  }
  model.loglik = -nll;
  return model;
}

} // namespace

GPModel fit_gp_excesses(std::span<const double> z, std::span<const int> months,
                        const ThresholdModel& thresholds, ShapeMode mode,
                        const GPFitOptions& options) {
  if (z.size() != months.size()) throw std::invalid_argument("one month per excess required");
  if (!(options.xi_lower < options.xi_upper)) throw std::invalid_argument("empty shape box");
  const auto g = group_excesses(z, months);
  check_not_degenerate(g.pooled);
  GPModel model = mode == ShapeMode::constant ? fit_constant_shape(g, options)
                                              : fit_month_shape(g, options);
  model.thresholds = thresholds;
  return model;
}

GPModel fit_gp(const ClusterSet& cs, const ThresholdModel& thresholds, ShapeMode mode,
               const GPFitOptions& options) {
  std::vector<double> z(cs.maxima.size());
  for (std::size_t j = 0; j < z.size(); ++j)
    z[j] = cs.maxima[j] - threshold_at(thresholds, cs.maxima_months[j]);
  return fit_gp_excesses(z, cs.maxima_months, thresholds, mode, options);
}

// ---------------------------------------------------------------------------

InterpolatedEcdf::InterpolatedEcdf(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (i + 1 < sample.size() && sample[i + 1] == sample[i]) continue;
    knots_.push_back(sample[i]);
    probs_.push_back(static_cast<double>(i + 1) / n);
  }
}

double InterpolatedEcdf::cdf(double y) const {
  if (knots_.empty()) throw std::logic_error("empty empirical CDF");
  if (y < knots_.front()) return 0.0;
  if (y >= knots_.back()) return 1.0;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), y);
  const auto hi = static_cast<std::size_t>(it - knots_.begin());
  const std::size_t lo = hi - 1;
  const double w = (y - knots_[lo]) / (knots_[hi] - knots_[lo]);
  return probs_[lo] + w * (probs_[hi] - probs_[lo]);
}

double InterpolatedEcdf::quantile(double p) const {
  if (knots_.empty()) throw std::logic_error("empty empirical CDF");
  if (p <= probs_.front()) return knots_.front();
  if (p >= 1.0) return knots_.back();
  const auto it = std::lower_bound(probs_.begin(), probs_.end(), p);
  const auto hi = static_cast<std::size_t>(it - probs_.begin());
  const std::size_t lo = hi - 1;
  const double w = (p - probs_[lo]) / (probs_[hi] - probs_[lo]);
  return knots_[lo] + w * (knots_[hi] - knots_[lo]);
}

MixedDistribution::MixedDistribution(std::span<const double> values,
                                     std::span<const std::uint8_t> months, double pi, GPModel gp,
                                     BulkMode mode)
    : pi_(pi), gp_(std::move(gp)), mode_(mode) {
  if (!(pi >= 0.0 && pi < 1.0)) throw std::invalid_argument("tail probability must lie in [0, 1)");
  if (values.empty()) throw std::invalid_argument("bulk sample is empty");
  if (values.size() != months.size()) throw std::invalid_argument("one month per value required");
  pooled_ = InterpolatedEcdf(std::vector<double>(values.begin(), values.end()));
  if (mode_ == BulkMode::by_month) {
    std::array<std::vector<double>, 12> groups;
    for (std::size_t i = 0; i < values.size(); ++i) groups.at(months[i] - 1u).push_back(values[i]);
    for (int m = 0; m < 12; ++m) {
      if (groups[m].empty())
        throw std::invalid_argument("month-conditional bulk: month " + std::to_string(m + 1) +
                                    " has no data");
      by_month_[m] = InterpolatedEcdf(std::move(groups[m]));
    }
  }
  for (int m = 1; m <= 12; ++m) bulk_at_threshold_[m - 1] = bulk(m).cdf(threshold_at(thresholds(), m));
}

const InterpolatedEcdf& MixedDistribution::bulk(int month) const {
  if (month < 1 || month > 12) throw std::out_of_range("month must lie in 1..12");
  return mode_ == BulkMode::pooled ? pooled_ : by_month_[month - 1];
}

double MixedDistribution::cdf(double y, int month) const {
  const double u = threshold_at(thresholds(), month);
  if (y > u) return 1.0 - pi_ * gp_survival(y - u, gp_.sigma(month), gp_.shape(month));
  const double fu = bulk_at_threshold_[month - 1];
  if (y == u || fu <= 0.0) return y == u ? 1.0 - pi_ : 0.0;
  return (1.0 - pi_) * std::min(bulk(month).cdf(y) / fu, 1.0);
}

double MixedDistribution::quantile(double p, int month) const {
  if (!(p >= 0.0 && p < 1.0)) throw std::domain_error("quantile level must lie in [0, 1)");
  const double u = threshold_at(thresholds(), month);
  if (p >= 1.0 - pi_)
    return u + gp_quantile(std::max(0.0, 1.0 - (1.0 - p) / pi_), gp_.sigma(month), gp_.shape(month));
  const double fu = bulk_at_threshold_[month - 1];
  if (fu <= 0.0) return u;
  return std::min(bulk(month).quantile(p * fu / (1.0 - pi_)), u);
}

double mixed_cdf(const MixedDistribution& md, double y, int month) { return md.cdf(y, month); }

double mixed_quantile(const MixedDistribution& md, double p, int month) {
  return md.quantile(p, month);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> exponential_margins(const GPModel& model, std::span<const double> z,
                                        std::span<const int> months) {
  std::vector<double> e(z.size());
  for (std::size_t j = 0; j < z.size(); ++j)
    e[j] = gp_to_exponential(z[j], model.sigma(months[j]), model.shape(months[j]));
  std::sort(e.begin(), e.end());
  return e;
}

} // namespace

std::vector<QQPoint> qq_exponential(const GPModel& model, const ClusterSet& cs) {
  std::vector<double> z(cs.maxima.size());
  for (std::size_t j = 0; j < z.size(); ++j)
    z[j] = cs.maxima[j] - threshold_at(model.thresholds, cs.maxima_months[j]);
  const auto e = exponential_margins(model, z, cs.maxima_months);
  const double n = static_cast<double>(e.size());
  std::vector<QQPoint> points(e.size());
  for (std::size_t j = 0; j < e.size(); ++j)
    points[j] = {-std::log1p(-static_cast<double>(j + 1) / (n + 1.0)), e[j]};
  return points;
}

Envelope qq_envelope(const GPModel& model, const ClusterSet& cs, int replicates,
                     std::uint64_t seed, double alpha) {
  if (replicates < 2) throw std::invalid_argument("envelope needs at least two replicates");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const std::size_t n = cs.maxima.size();
  std::vector<std::vector<double>> by_rank(n, std::vector<double>(static_cast<std::size_t>(replicates)));
  auto rng = make_stream(seed, "qq_envelope");
  std::vector<double> z(n);
  for (int b = 0; b < replicates; ++b) {
    for (std::size_t j = 0; j < n; ++j) {
      const int m = cs.maxima_months[j];
      z[j] = gp_sample(rng, model.sigma(m), model.shape(m));
    }
    const auto e = exponential_margins(model, z, cs.maxima_months);
    for (std::size_t j = 0; j < n; ++j) by_rank[j][static_cast<std::size_t>(b)] = e[j];
  }
  Envelope env;
  env.lower.resize(n);
  env.upper.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::sort(by_rank[j].begin(), by_rank[j].end());
    env.lower[j] = empirical_quantile(by_rank[j], alpha / 2.0);
    env.upper[j] = empirical_quantile(by_rank[j], 1.0 - alpha / 2.0);
  }
  return env;
}

} // namespace extremes
