#pragma once

#include <functional>
#include <span>
#include <vector>

namespace extremes::optim {

using Objective = std::function<double(std::span<const double>)>;

struct SimplexOptions {
  double f_tol = 1e-8;  // relative spread of objective values across the simplex
  double x_tol = 1e-7;  // max coordinate distance from the best vertex
  int max_iterations = 500;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Nelder-Mead downhill simplex. The objective may return +inf to mark
/// infeasible points; the initial point must be feasible. `step` sets the
/// initial edge length per coordinate (a scalar step is broadcast).
SimplexResult nelder_mead(const Objective& f, std::vector<double> x0,
                          std::vector<double> step,
                          const SimplexOptions& options = {});

SimplexResult nelder_mead(const Objective& f, std::vector<double> x0,
                          double step, const SimplexOptions& options = {});

} // namespace extremes::optim
