#include "doctest.h"

#include "extremes/optim.hpp"
#include "extremes/rng.hpp"

#include <cmath>
#include <limits>

using namespace extremes;

TEST_SUITE("rng") {

TEST_CASE("derived streams are reproducible and distinct") {
  auto a = make_stream(42, "x", 3);
  auto b = make_stream(42, "x", 3);
  auto c = make_stream(42, "x", 4);
  auto d = make_stream(42, "y", 3);
  const auto va = a();
  CHECK(va == b());
  CHECK(va != c());
  CHECK(va != d());
  CHECK(derive_seed(1, "algorithm1", 0) != derive_seed(2, "algorithm1", 0));
}

TEST_CASE("splitmix64 reference values") {
  // First two outputs of the reference generator with state 0.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(0x9e3779b97f4a7c15ULL) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("uniform_open never returns the endpoints") {
  auto rng = make_stream(1, "u");
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform_open(rng);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

} // TEST_SUITE

TEST_SUITE("optim") {

TEST_CASE("nelder_mead minimises the Rosenbrock function") {
  auto f = [](std::span<const double> x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  optim::SimplexOptions opt;
  opt.max_iterations = 5000;
  opt.f_tol = 1e-14;
  opt.x_tol = 1e-9;
  const auto r = optim::nelder_mead(f, {-1.2, 1.0}, 0.5, opt);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("nelder_mead respects an infeasible region") {
  auto f = [](std::span<const double> x) {
    if (x[0] < 2.0) return std::numeric_limits<double>::infinity();
    return (x[0] - 1.0) * (x[0] - 1.0);
  };
  optim::SimplexOptions opt;
  opt.max_iterations = 2000;
  const auto r = optim::nelder_mead(f, {5.0}, 1.0, opt);
  CHECK(r.x[0] >= 2.0);
  CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-4));
}

} // TEST_SUITE
