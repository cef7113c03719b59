#include "extremes/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace extremes::optim {

namespace {

// Standard coefficients (reflection, expansion, contraction, shrink).
constexpr double kAlpha = 1.0;
constexpr double kGamma = 2.0;
constexpr double kRho = 0.5;
constexpr double kSigma = 0.5;

double evaluate(const Objective& f, std::span<const double> x) {
  double v = f(x);
  return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

} // namespace

SimplexResult nelder_mead(const Objective& f, std::vector<double> x0,
                          std::vector<double> step,
                          const SimplexOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty parameter vector");
  if (step.size() != n) throw std::invalid_argument("nelder_mead: step size mismatch");

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  values[0] = evaluate(f, simplex[0]);
  if (!std::isfinite(values[0]))
    throw std::invalid_argument("nelder_mead: objective infeasible at start point");

  for (std::size_t i = 0; i < n; ++i) {
    simplex[i + 1][i] += step[i];
    values[i + 1] = evaluate(f, simplex[i + 1]);
    if (!std::isfinite(values[i + 1])) {
      // try the other direction before giving up on this vertex
      simplex[i + 1][i] = x0[i] - step[i];
      values[i + 1] = evaluate(f, simplex[i + 1]);
    }
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  SimplexResult result;

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double spread = 0.0;
    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      spread = std::max(spread, std::abs(values[i] - values[best]));
      for (std::size_t j = 0; j < n; ++j)
        diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
    }
    const double scale = 1.0 + std::abs(values[best]);
    if (std::isfinite(spread) && spread <= options.f_tol * scale &&
        diameter <= options.x_tol) {
      result.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    for (std::size_t j = 0; j < n; ++j)
      trial[j] = centroid[j] + kAlpha * (centroid[j] - simplex[worst][j]);
    const double f_reflect = evaluate(f, trial);

    if (f_reflect < values[best]) {
      for (std::size_t j = 0; j < n; ++j)
        trial2[j] = centroid[j] + kGamma * (trial[j] - centroid[j]);
      const double f_expand = evaluate(f, trial2);
      if (f_expand < f_reflect) {
        simplex[worst] = trial2;
        values[worst] = f_expand;
      } else {
        simplex[worst] = trial;
        values[worst] = f_reflect;
      }
      continue;
    }
    if (f_reflect < values[second]) {
      simplex[worst] = trial;
      values[worst] = f_reflect;
      continue;
    }

    // contraction: outside if the reflected point beat the worst, else inside
    const bool outside = f_reflect < values[worst];
    for (std::size_t j = 0; j < n; ++j) {
      const double toward = outside ? trial[j] : simplex[worst][j];
      trial2[j] = centroid[j] + kRho * (toward - centroid[j]);
    }
    const double f_contract = evaluate(f, trial2);
    if (f_contract < (outside ? f_reflect : values[worst])) {
      simplex[worst] = trial2;
      values[worst] = f_contract;
      continue;
    }

    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j)
        simplex[i][j] = simplex[best][j] + kSigma * (simplex[i][j] - simplex[best][j]);
      values[i] = evaluate(f, simplex[i]);
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  const auto best = static_cast<std::size_t>(best_it - values.begin());
  result.x = simplex[best];
  result.value = values[best];
  result.iterations = it;
  return result;
}

SimplexResult nelder_mead(const Objective& f, std::vector<double> x0,
                          double step, const SimplexOptions& options) {
  std::vector<double> steps(x0.size(), step);
  return nelder_mead(f, std::move(x0), std::move(steps), options);
}

} // namespace extremes::optim
