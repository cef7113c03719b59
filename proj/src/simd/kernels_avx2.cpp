#include "extremes/simd/kernels.hpp"

#include <immintrin.h>

#include <cstdint>
#include <limits>

namespace extremes::simd::avx2 {

double pinball_sum(std::span<const double> x, double u, double tau) {
  const __m256d vu = _mm256_set1_pd(u);
  const __m256d vtau = _mm256_set1_pd(tau);
  const __m256d vtau1 = _mm256_set1_pd(tau - 1.0);
  const __m256d zero = _mm256_setzero_pd();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();

  const std::size_t n = x.size();
  const double* p = x.data();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d t0 = _mm256_sub_pd(_mm256_loadu_pd(p + i), vu);
    __m256d t1 = _mm256_sub_pd(_mm256_loadu_pd(p + i + 4), vu);
    __m256d w0 = _mm256_blendv_pd(vtau, vtau1, _mm256_cmp_pd(t0, zero, _CMP_LT_OQ));
    __m256d w1 = _mm256_blendv_pd(vtau, vtau1, _mm256_cmp_pd(t1, zero, _CMP_LT_OQ));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(w0, t0));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(w1, t1));
  }
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_sub_pd(_mm256_loadu_pd(p + i), vu);
    __m256d w = _mm256_blendv_pd(vtau, vtau1, _mm256_cmp_pd(t, zero, _CMP_LT_OQ));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(w, t));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    const double t = p[i] - u;
    total += t < 0.0 ? (tau - 1.0) * t : tau * t;
  }
  return total;
}

std::size_t count_above(std::span<const double> x, double level) {
  const __m256d vl = _mm256_set1_pd(level);
  const std::size_t n = x.size();
  const double* p = x.data();
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(p + i), vl, _CMP_GT_OQ));
    count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) count += p[i] > level ? 1 : 0;
  return count;
}

constexpr std::size_t kMaxDepth = 64;

// Four rows per pass. Each lane keeps a sorted buffer of the `depth` smallest
// (or largest) values seen so far; inserting a value is a min/max bubble pass.
// Deeper selections than kMaxDepth go to the scalar kernel.
void kth_smallest_rows(std::span<const double> matrix, std::size_t n_cols,
                       std::size_t k, std::span<double> out) {
  const std::size_t n_rows = out.size();
  const bool from_top = k > (n_cols + 1) / 2;
  const std::size_t depth = from_top ? n_cols - k + 1 : k;
  const double fill = from_top ? -std::numeric_limits<double>::infinity()
                               : std::numeric_limits<double>::infinity();

  if (depth > kMaxDepth) return scalar::kth_smallest_rows(matrix, n_cols, k, out);
  __m256d buf[kMaxDepth];
  const double* base = matrix.data();
  std::size_t r = 0;
  for (; r + 4 <= n_rows; r += 4) {
    for (std::size_t j = 0; j < depth; ++j) buf[j] = _mm256_set1_pd(fill);
    const double* r0 = base + r * n_cols;
    const double* r1 = r0 + n_cols;
    const double* r2 = r1 + n_cols;
    const double* r3 = r2 + n_cols;
    for (std::size_t c = 0; c < n_cols; ++c) {
      __m256d v = _mm256_set_pd(r3[c], r2[c], r1[c], r0[c]);
      if (from_top) {
        for (std::size_t j = 0; j < depth; ++j) {
          const __m256d hi = _mm256_max_pd(buf[j], v);
          v = _mm256_min_pd(buf[j], v);
          buf[j] = hi;
        }
      } else {
        for (std::size_t j = 0; j < depth; ++j) {
          const __m256d lo = _mm256_min_pd(buf[j], v);
          v = _mm256_max_pd(buf[j], v);
          buf[j] = lo;
        }
      }
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, buf[depth - 1]);
    out[r] = lanes[0];
    out[r + 1] = lanes[1];
    out[r + 2] = lanes[2];
    out[r + 3] = lanes[3];
  }
  if (r < n_rows)
    scalar::kth_smallest_rows(matrix.subspan(r * n_cols), n_cols, k, out.subspan(r));
}

} // namespace extremes::simd::avx2
