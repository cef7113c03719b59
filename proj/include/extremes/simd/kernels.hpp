#pragma once

// Data-parallel inner loops with a scalar reference implementation and
// vectorised variants chosen at runtime. Every variant must agree with the
// scalar reference: exactly for selections and counts, to rounding for sums.

#include <cstddef>
#include <span>
#include <string_view>

namespace extremes::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Best instruction set supported by the running CPU and compiled in.
Isa detected_isa() noexcept;

/// Instruction set currently used by the dispatching entry points. Starts at
/// detected_isa() unless EXTREMES_SIMD=scalar is set in the environment.
Isa active_isa() noexcept;

/// Force a variant (tests, benchmarking). Throws std::invalid_argument when
/// the CPU or build does not support it.
void set_active_isa(Isa isa);

bool isa_available(Isa isa) noexcept;

/// Sum of the quantile check loss rho_tau(x - u) over x.
double pinball_sum(std::span<const double> x, double u, double tau);

/// Number of elements strictly greater than `level`.
std::size_t count_above(std::span<const double> x, double level);

/// For a row-major n_rows x n_cols matrix, writes the k-th smallest entry
/// (1-based k) of each row to out[row].
void kth_smallest_rows(std::span<const double> matrix, std::size_t n_cols,
                       std::size_t k, std::span<double> out);

namespace scalar {
double pinball_sum(std::span<const double> x, double u, double tau);
std::size_t count_above(std::span<const double> x, double level);
void kth_smallest_rows(std::span<const double> matrix, std::size_t n_cols,
                       std::size_t k, std::span<double> out);
} // namespace scalar

#ifdef EXTREMES_HAVE_AVX2_KERNELS
namespace avx2 {
double pinball_sum(std::span<const double> x, double u, double tau);
std::size_t count_above(std::span<const double> x, double level);
void kth_smallest_rows(std::span<const double> matrix, std::size_t n_cols,
                       std::size_t k, std::span<double> out);
} // namespace avx2
#endif

} // namespace extremes::simd
