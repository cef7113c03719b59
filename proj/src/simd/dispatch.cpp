#include "extremes/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace extremes::simd {

namespace {

Isa initial_isa() noexcept {
  const char* env = std::getenv("EXTREMES_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::scalar;
  return detected_isa();
}

std::atomic<Isa>& active() noexcept {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

} // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
  case Isa::scalar: return "scalar";
  case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
  case Isa::scalar: return true;
  case Isa::avx2:
#if defined(EXTREMES_HAVE_AVX2_KERNELS)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
  }
  return false;
}

Isa detected_isa() noexcept {
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa))
    throw std::invalid_argument("SIMD variant not available: " + std::string(isa_name(isa)));
  active().store(isa, std::memory_order_relaxed);
}

double pinball_sum(std::span<const double> x, double u, double tau) {
#if defined(EXTREMES_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::avx2) return avx2::pinball_sum(x, u, tau);
#endif
  return scalar::pinball_sum(x, u, tau);
}

std::size_t count_above(std::span<const double> x, double level) {
#if defined(EXTREMES_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::avx2) return avx2::count_above(x, level);
#endif
  return scalar::count_above(x, level);
}

void kth_smallest_rows(std::span<const double> matrix, std::size_t n_cols,
                       std::size_t k, std::span<double> out) {
  if (n_cols == 0 || k < 1 || k > n_cols)
    throw std::out_of_range("kth_smallest_rows: k must lie in 1..n_cols");
  if (matrix.size() < out.size() * n_cols)
    throw std::invalid_argument("kth_smallest_rows: matrix smaller than rows x cols");
#if defined(EXTREMES_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::avx2) return avx2::kth_smallest_rows(matrix, n_cols, k, out);
#endif
  scalar::kth_smallest_rows(matrix, n_cols, k, out);
}

} // namespace extremes::simd
