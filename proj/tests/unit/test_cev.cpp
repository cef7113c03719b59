#include "doctest.h"

#include "helpers.hpp"

#include "extremes/cev.hpp"
#include "extremes/synth.hpp"

#include <chrono>
#include <cmath>
#include <cstring>

using namespace extremes;

namespace {

struct Pairs {
  std::vector<double> x, y;
};

// x above q with standard exponential excess (the Laplace upper tail), then
// y = b0 x + x^b1 z.
Pairs ht_pairs(std::size_t n, double b0, double b1, double q, std::uint64_t seed) {
  auto rng = make_stream(seed, "ht-pairs");
  std::exponential_distribution<double> ex(1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  Pairs p;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = q + ex(rng);
    p.x.push_back(x);
    p.y.push_back(b0 * x + std::pow(x, b1) * z(rng));
  }
  return p;
}

double laplace_draw(Rng& rng) { return laplace_quantile(uniform_open(rng)); }

CEVModel fixed_model(double b0, double b1, std::vector<double> residuals, double bandwidth, double q = 1.0) {
  CEVModel m;
  m.beta0 = b0;
  m.beta1 = b1;
  m.q_threshold = q;
  m.residuals = std::move(residuals);
  m.kde_bandwidth = bandwidth;
  return m;
}

} // namespace

TEST_SUITE("cev") {

TEST_CASE("Laplace margins") {
  CHECK(laplace_quantile(0.5) == 0.0);
  CHECK(laplace_quantile(1.0 - std::exp(-1.0) / 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(laplace_quantile(0.9) == doctest::Approx(-std::log(0.2)));
  for (double y : {-5.0, -0.3, 0.0, 0.7, 4.0}) CHECK(laplace_quantile(laplace_cdf(y)) == doctest::Approx(y));
  CHECK_THROWS(laplace_quantile(0.0));
  CHECK_THROWS(laplace_quantile(1.0));
  CHECK(laplace_quantile(1.0 - kLaplaceClip) == doctest::Approx(-std::log(2.0 * kLaplaceClip)));
}

TEST_CASE("recovers beta0 = 0.4, beta1 = 0.2 from 20000 pairs") {
  const auto start = std::chrono::steady_clock::now();
  const double q = -std::log(0.2);
  const auto p = ht_pairs(20000, 0.4, 0.2, q, 1);
  const auto m = fit_cev_pairs(p.x, p.y, q);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(m.beta0 >= 0.35);
  CHECK(m.beta0 <= 0.45);
  CHECK(m.beta1 >= 0.1);
  CHECK(m.beta1 <= 0.3);
  CHECK(secs < 20.0);

  const auto again = cev_residuals(p.x, p.y, m.beta0, m.beta1);
  REQUIRE(again.size() == m.residuals.size());
  CHECK(std::memcmp(again.data(), m.residuals.data(), again.size() * sizeof(double)) == 0);
  // stored residuals are exactly (y - b0 x) / x^b1
  CHECK(m.residuals[17] == (p.y[17] - m.beta0 * p.x[17]) / std::pow(p.x[17], m.beta1));
  CHECK(m.kde_bandwidth == doctest::Approx(silverman_bandwidth(m.residuals)));
}

TEST_CASE("estimation error shrinks with the sample size") {
  const double q = 1.0;
  auto spread = [&](std::size_t n) {
    std::vector<double> b0;
    for (std::uint64_t s = 0; s < 40; ++s) b0.push_back(fit_cev_pairs(ht_pairs(n, 0.4, 0.2, q, 50 + s).x,
                                                                       ht_pairs(n, 0.4, 0.2, q, 50 + s).y, q).beta0);
    return std::sqrt(testing::variance(b0));
  };
  const double ratio = spread(500) / spread(2000);
  CHECK(ratio > 1.4);
  CHECK(ratio < 2.8);
}

TEST_CASE("comonotone and independent corners") {
  const double q = 1.0;
  auto rng = make_stream(2, "corners");
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> x, y, yi;
  for (int i = 0; i < 2000; ++i) {
    x.push_back(q + ex(rng));
    y.push_back(x.back());
    yi.push_back(laplace_draw(rng));
  }
  const auto same = fit_cev_pairs(x, y, q);
  CHECK(same.beta0 == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::sqrt(testing::variance(same.residuals)) < 0.05);

  const auto indep = fit_cev_pairs(x, yi, q);
  CHECK(std::abs(indep.beta0) < 0.1);
  CHECK(indep.beta1 < 1.0);
}

TEST_CASE("fit preconditions") {
  const std::vector<double> x{2.0, 3.0};
  CHECK_THROWS(fit_cev_pairs(x, x, 1.0));                       // too few pairs
  CHECK_THROWS(fit_cev_pairs(std::vector<double>(200, 0.5), std::vector<double>(200, 0.5), 1.0));
}

TEST_CASE("Silverman bandwidth by hand") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  // sd = 3.02765, IQR/1.34 = 3.35821, so 0.9 * 3.02765 * 10^-0.2
  CHECK(silverman_bandwidth(v) == doctest::Approx(0.9 * 3.0276503540974917 * std::pow(10.0, -0.2)));
}

TEST_CASE("residual sampling") {
  auto rng = make_stream(3, "kde");
  const auto zero_bw = fixed_model(0, 0, {-1.0, 0.5, 2.0}, 0.0);
  for (int i = 0; i < 100; ++i) {
    const double z = sample_residual(zero_bw, rng);
    CHECK((z == -1.0 || z == 0.5 || z == 2.0));
  }
  const auto single = fixed_model(0, 0, {0.25}, 0.0);
  for (int i = 0; i < 10; ++i) CHECK(sample_residual(single, rng) == 0.25);

  std::vector<double> res;
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int i = 0; i < 500; ++i) res.push_back(n01(rng) * 2.0 + 1.0);
  const double h = 0.7;
  const auto smooth = fixed_model(0, 0, res, h);
  std::vector<double> draws(1000000);
  for (auto& d : draws) d = sample_residual(smooth, rng);
  const double pop_var = testing::variance(res) * (res.size() - 1) / res.size();
  CHECK(testing::variance(draws) == doctest::Approx(pop_var + h * h).epsilon(0.02));
  CHECK_THROWS(sample_residual(fixed_model(0, 0, {}, 0.1), rng));
}

TEST_CASE("chain recursion") {
  auto rng = make_stream(4, "chain");
  SUBCASE("independence corner") {
    const auto m = fixed_model(0.0, 0.0, {-2.0, 3.0, 7.0}, 0.0);
    const auto c = simulate_chain(m, 5.0, 30, rng);
    REQUIRE(c.size() == 31);
    CHECK(c[0] == 5.0);
    for (std::size_t j = 1; j < c.size(); ++j) CHECK((c[j] == -2.0 || c[j] == 3.0 || c[j] == 7.0));
  }
  SUBCASE("degenerate persistence") {
    const auto c = simulate_chain(fixed_model(1.0, 0.1, {0.0}, 0.0), 4.0, 30, rng);
    for (double v : c) CHECK(v == 4.0);
  }
  SUBCASE("halving") {
    const auto c = simulate_chain(fixed_model(0.5, 0.0, {0.0}, 0.0), 4.0, 5, rng);
    CHECK(c == std::vector<double>{4.0, 2.0, 1.0, 0.5, 0.25, 0.125});
  }
  SUBCASE("truncation at a nonpositive value") {
    const auto c = simulate_chain(fixed_model(0.0, 0.5, {-1.0}, 0.0), 4.0, 30, rng);
    CHECK(c == std::vector<double>{4.0, -2.0});
  }
  SUBCASE("start below the conditioning level") {
    CHECK_THROWS_AS(simulate_chain(fixed_model(0.5, 0.0, {0.0}, 0.0, 2.0), 2.0, 5, rng), std::domain_error);
  }
  SUBCASE("reproducible") {
    const auto m = fixed_model(0.3, 0.4, {-1.0, 0.0, 1.0}, 0.3);
    auto r1 = make_stream(9, "c");
    auto r2 = make_stream(9, "c");
    CHECK(simulate_chain(m, 3.0, 30, r1) == simulate_chain(m, 3.0, 30, r2));
  }
}

TEST_CASE("persistence rule") {
  CHECK(persists_above(std::vector<double>{6, 6, 1}, 5.0));
  CHECK_FALSE(persists_above(std::vector<double>{6, 1, 6}, 5.0));
  CHECK(persists_above(std::vector<double>{1, 6, 1, 6, 6}, 5.0));
  CHECK_FALSE(persists_above(std::vector<double>{6, 5}, 5.0));
}

TEST_CASE("Laplace transform round trip and margins on synthetic data") {
  SynthSpec spec = SynthSpec::uniform_months(2.0, 1.0, 0.0);
  spec.n_runs = 1;
  spec.n_days = 60225;
  spec.n_sites = 3;
  spec.bulk_floor = 0.0;
  spec.seed = 21;
  const auto latent = generate_latent_series(spec, 0);
  const auto thr = testing::constant_threshold(2.0);
  const auto cs = run_decluster(latent, thr, 3);
  const auto gp = fit_gp(cs, thr, ShapeMode::constant);
  const MixedDistribution md(latent.values, latent.months, cs.pi_star_hat, gp);
  const auto lap = to_laplace(latent, md);

  double m1 = 0.0, m2 = 0.0, m3 = 0.0;
  for (double v : lap.values) m1 += v / lap.values.size();
  for (double v : lap.values) {
    m2 += std::pow(v - m1, 2) / lap.values.size();
    m3 += std::pow(v - m1, 3) / lap.values.size();
  }
  CHECK(std::abs(m3 / std::pow(m2, 1.5)) < 0.1);
  auto sorted = lap.values;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::abs(empirical_quantile(sorted, 0.9) - (-std::log(0.2))) < 0.1);

  for (std::size_t i = 0; i < latent.size(); i += 37) {
    const double x = latent.values[i];
    const double back = from_laplace(lap.values[i], latent.months[i], md);
    REQUIRE(std::abs(back - x) <= 1e-6 * std::max(1.0, std::abs(x)));
  }
}

TEST_CASE("fit on a Laplace series and the predictive band") {
  auto rng = make_stream(5, "series");
  LaplaceSeries s;
  double prev = laplace_draw(rng);
  std::normal_distribution<double> z(0.0, 0.8);
  for (int i = 0; i < 40000; ++i) {
    s.values.push_back(prev);
    s.months.push_back(1);
    prev = prev > 0.0 ? 0.5 * prev + std::pow(prev, 0.3) * z(rng) : laplace_draw(rng);
  }
  const auto m = fit_cev(s);
  auto sorted = s.values;
  std::sort(sorted.begin(), sorted.end());
  CHECK(m.q_threshold == empirical_quantile(sorted, 0.9));
  CHECK(m.beta0 == doctest::Approx(0.5).epsilon(0.2));
  const auto band = cev_band(m, 8.0, 50);
  REQUIRE(band.size() == 50);
  for (const auto& b : band) {
    CHECK(b.lower <= b.upper);
    CHECK(b.x > m.q_threshold);
    CHECK(b.x <= 8.0);
  }
}

} // TEST_SUITE
