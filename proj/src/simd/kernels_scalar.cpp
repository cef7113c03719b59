#include "extremes/simd/kernels.hpp"

#include <algorithm>
#include <vector>

namespace extremes::simd::scalar {

double pinball_sum(std::span<const double> x, double u, double tau) {
  double total = 0.0;
  for (double v : x) {
    const double t = v - u;
    total += t < 0.0 ? (tau - 1.0) * t : tau * t;
  }
  return total;
}

std::size_t count_above(std::span<const double> x, double level) {
  std::size_t n = 0;
  for (double v : x) n += v > level ? 1 : 0;
  return n;
}

void kth_smallest_rows(std::span<const double> matrix, std::size_t n_cols,
                       std::size_t k, std::span<double> out) {
  std::vector<double> row(n_cols);
  for (std::size_t r = 0; r < out.size(); ++r) {
    auto src = matrix.subspan(r * n_cols, n_cols);
    std::copy(src.begin(), src.end(), row.begin());
    auto nth = row.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(row.begin(), nth, row.end());
    out[r] = *nth;
  }
}

} // namespace extremes::simd::scalar
