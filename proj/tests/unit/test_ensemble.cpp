#include "doctest.h"

#include "helpers.hpp"

#include "extremes/error.hpp"
#include "extremes/synth.hpp"

#include <cmath>

using namespace extremes;
using testing::exact_emulator;

namespace {

SimulationConfig base_config(int n_sim, int n_srun, std::uint64_t seed = 1) {
  SimulationConfig c;
  c.n_sim = n_sim;
  c.n_srun = n_srun;
  c.seed = seed;
  return c;
}

double binomial_cdf(std::size_t n, double p, std::size_t k) {
  double s = 0.0;
  for (std::size_t j = 0; j <= k; ++j)
    s += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) +
                  j * std::log(p) + (n - j) * std::log1p(-p));
  return s;
}

// P(some two consecutive trials succeed) for a first success followed by
// `steps` independent Bernoulli(rho) trials.
double persistence_prob(double rho, int steps) {
  double last_hit = 1.0, last_miss = 0.0, done = 0.0;
  for (int j = 0; j < steps; ++j) {
    done += last_hit * rho;
    const double hit = last_miss * rho;
    last_miss = (last_hit + last_miss) * (1.0 - rho);
    last_hit = hit;
  }
  return done;
}

RunEmulator with_cev(RunEmulator em, CEVModel cev) {
  em.question = Question::q3;
  em.cev = std::move(cev);
  return em;
}

} // namespace

TEST_SUITE("ensemble") {

TEST_CASE("question table") {
  CHECK(question_spec(Question::q1).order_k == 1);
  CHECK(question_spec(Question::q1).target == 1.7);
  CHECK(question_spec(Question::q1).shape == ShapeMode::by_month);
  CHECK(question_spec(Question::q2).order_k == 20);
  CHECK(question_spec(Question::q2).target == 5.7);
  CHECK(question_spec(Question::q3).order_k == 23);
  CHECK(question_spec(Question::q3).target == 5.0);
  CHECK(question_spec(Question::q3).persistence);
  CHECK(parse_question("Q2") == Question::q2);
  CHECK(question_name(Question::q3) == "q3");
  CHECK_THROWS_AS(parse_question("q4"), std::invalid_argument);
}

TEST_CASE("combine_rates") {
  std::vector<RunEmulator> ems;
  for (double p : {0.04, 0.04, 0.06, 0.06}) {
    ems.push_back(exact_emulator(1.0, 1.0, 0.0, p, 3650, 10));
    ems.back().clusters.pi_star_hat = p;
  }
  auto c = combine_rates(ems);
  CHECK(c.pi_hat == doctest::Approx(0.05));
  CHECK(c.theta_hat == 1.0);
  ems[0].clusters.theta_hat = 0.5;
  ems[1].clusters.theta_hat.reset();
  c = combine_rates(ems);
  CHECK(c.theta_hat == doctest::Approx((0.5 + 1.0 + 1.0) / 3.0));
  CHECK(combine_rates(std::span(ems).first(1)).pi_hat == 0.04);
  for (auto& e : ems) e.clusters.theta_hat.reset();
  CHECK_THROWS_AS(combine_rates(ems), std::domain_error);
}

TEST_CASE("month counts over a horizon") {
  const auto em = exact_emulator(1.0, 1.0, 0.0, 0.05, 730, 5);
  const auto counts = em.month_counts(365);
  const auto& lengths = Calendar::noleap().month_lengths();
  for (int m = 0; m < 12; ++m) CHECK(counts[m] == static_cast<std::size_t>(lengths[m]));
  CHECK(em.month_counts(0)[0] == 62);
}

TEST_CASE("binomial inverse") {
  CHECK(binomial_inverse(0, 0.3, 0.5) == 0);
  CHECK(binomial_inverse(10, 0.0, 0.99) == 0);
  CHECK(binomial_inverse(10, 1.0, 0.01) == 10);
  for (std::size_t n : {1u, 7u, 40u}) {
    for (double p : {0.02, 0.3, 0.5, 0.8}) {
      for (double u : {0.001, 0.2, 0.5, 0.77, 0.999}) {
        const auto k = binomial_inverse(n, p, u);
        // smallest k with F(k) >= u, up to rounding at the boundary
        CHECK(binomial_cdf(n, p, k) >= u - 1e-12);
        if (k > 0) CHECK(binomial_cdf(n, p, k - 1) < u + 1e-12);
      }
    }
  }
  for (double u : {0.1, 0.5, 0.9}) {
    std::size_t prev = 0;
    for (double p = 0.0; p <= 1.0; p += 0.01) {
      const auto k = binomial_inverse(50, p, u);
      CHECK(k >= prev);
      prev = k;
    }
  }
  // normal branch: mean of many draws
  auto rng = make_stream(1, "binom");
  double sum = 0.0;
  for (int i = 0; i < 4000; ++i) sum += binomial_inverse(2000000, 0.3, uniform_open(rng));
  CHECK(sum / 4000 == doctest::Approx(600000.0).epsilon(1e-3));
}

TEST_CASE("marginal simulation against the closed-form exponential tail") {
  const std::size_t n_days = 60225;
  const auto em = exact_emulator(1.0, 1.0, 0.0, 0.05, n_days, 100);
  const double target = 1.0 + std::log(2.0);
  const double p = 0.05 * 0.5;
  const double expect = p * n_days;  // 1505.6
  CHECK(expect == doctest::Approx(1505.6).epsilon(1e-4));
  for (auto sampler : {MarginalSampler::per_day, MarginalSampler::aggregated}) {
    auto rng = make_stream(2, "marginal", static_cast<int>(sampler));
    double sum = 0.0;
    for (int r = 0; r < 200; ++r) sum += simulate_marginal_run(em, 0.05, target, rng, sampler);
    const double sd_of_mean = std::sqrt(n_days * p * (1.0 - p) / 200.0);
    CHECK(std::abs(sum / 200.0 - expect) < 3.0 * sd_of_mean);
  }
  auto rng = make_stream(3, "marginal");
  CHECK(simulate_marginal_run(em, 0.0, target, rng) == 0);
  CHECK(simulate_marginal_run(em, 0.05, INFINITY, rng) == 0);
  CHECK_THROWS_AS(simulate_marginal_run(em, 0.05, 0.9, rng), std::domain_error);
  CHECK_THROWS_AS(simulate_marginal_run(em, 0.05, 1.0, rng), std::domain_error);
}

TEST_CASE("algorithm1 closed-form oracle") {
  const std::vector<RunEmulator> ems{exact_emulator(1.0, 1.0, 0.0, 0.05, 60225, 100)};
  auto cfg = base_config(500, 50, 4);
  cfg.target_level = 1.0 + std::log(100.0);
  cfg.sim_days = 1000;
  const CombinedEstimates combined{0.05, 1.0};
  const auto r = algorithm1(ems, cfg, combined);
  CHECK(std::abs(r.point - 0.5) <= 0.05);
  CHECK(r.c_samples == r.mean_e_samples);  // theta = 1 leaves c = e-bar
  CHECK(r.ci_low <= r.point);
  CHECK(r.point <= r.ci_high);
  CHECK(r.point == doctest::Approx(testing::mean(r.c_samples)).epsilon(1e-12));
  auto sorted = r.c_samples;
  std::sort(sorted.begin(), sorted.end());
  CHECK(r.ci_low == empirical_quantile(sorted, 0.025));
  CHECK(r.ci_high == empirical_quantile(sorted, 0.975));

  cfg.alpha = 0.5;
  const auto narrow = algorithm1(ems, cfg, combined);
  CHECK(narrow.ci_low >= r.ci_low);
  CHECK(narrow.ci_high <= r.ci_high);
}

TEST_CASE("algorithm1 corrections, guard and degenerate input") {
  const std::vector<RunEmulator> ems{exact_emulator(1.0, 1.0, 0.0, 0.05, 60225, 100)};
  auto cfg = base_config(50, 20, 5);
  cfg.target_level = 1.0 + std::log(100.0);

  const auto zero = algorithm1(ems, cfg, CombinedEstimates{0.0, 1.0});
  CHECK(zero.point == 0.0);
  CHECK(zero.ci_low == 0.0);
  CHECK(zero.ci_high == 0.0);

  // training length: about 30 events per run, so e-bar > 1
  CHECK_THROWS_AS(algorithm1(ems, cfg, CombinedEstimates{0.05, 0.8}), FitError);
  cfg.correction = Correction::multiplicative;
  const auto mult = algorithm1(ems, cfg, CombinedEstimates{0.05, 0.8});
  for (std::size_t t = 0; t < mult.c_samples.size(); ++t)
    CHECK(mult.c_samples[t] == doctest::Approx(0.8 * mult.mean_e_samples[t]));
  cfg.correction = Correction::power;
  cfg.rate_mode = true;
  const auto rate = algorithm1(ems, cfg, CombinedEstimates{0.05, 0.8});
  CHECK(rate.point > 0.99);  // nearly every run has an event
  for (double e : rate.mean_e_samples) CHECK(e <= 1.0);

  cfg.rate_mode = false;
  cfg.sim_days = 1000;
  const auto corrected = algorithm1(ems, cfg, CombinedEstimates{0.05, 0.5});
  for (std::size_t t = 0; t < corrected.c_samples.size(); ++t)
    CHECK(corrected.c_samples[t] == doctest::Approx(1.0 - std::pow(1.0 - corrected.mean_e_samples[t], 0.5)));
}

TEST_CASE("algorithm1 is deterministic and thread-count invariant") {
  std::vector<RunEmulator> ems;
  for (int r = 0; r < 3; ++r) ems.push_back(exact_emulator(1.0, 1.0 + 0.1 * r, 0.0, 0.05, 20000, 50, 10 + r));
  auto cfg = base_config(300, 20, 6);
  cfg.target_level = 4.0;
  cfg.sim_days = 500;
  cfg.correction = Correction::multiplicative;
  const CombinedEstimates combined{0.05, 0.9};
  const auto a = algorithm1(ems, cfg, combined);
  const auto b = algorithm1(ems, cfg, combined);
  cfg.threads = 4;
  const auto c = algorithm1(ems, cfg, combined);
  CHECK(a.c_samples == b.c_samples);
  CHECK(a.c_samples == c.c_samples);
  CHECK(a.point == c.point);
  CHECK(a.ci_low == c.ci_low);
  cfg.seed = 7;
  CHECK(algorithm1(ems, cfg, combined).c_samples != a.c_samples);
}

TEST_CASE("identical emulators: one copy or four") {
  const auto em = exact_emulator(1.0, 1.0, 0.0, 0.05, 60225, 100);
  const std::vector<RunEmulator> one{em};
  const std::vector<RunEmulator> four{em, em, em, em};
  auto cfg = base_config(2000, 50, 8);
  cfg.target_level = 1.0 + std::log(100.0);
  cfg.sim_days = 1000;
  const CombinedEstimates combined{0.05, 1.0};
  const auto a = algorithm1(one, cfg, combined);
  cfg.seed = 9;
  const auto b = algorithm1(four, cfg, combined);
  CHECK(testing::ks_distance(a.c_samples, b.c_samples) < 0.05);
}

TEST_CASE("raising the target never raises the estimate") {
  const std::vector<RunEmulator> ems{exact_emulator(1.0, 1.0, 0.1, 0.05, 20000, 50),
                                     exact_emulator(1.0, 1.3, 0.0, 0.05, 20000, 50, 6)};
  auto cfg = base_config(200, 30, 10);
  cfg.sim_days = 2000;
  cfg.correction = Correction::multiplicative;
  const CombinedEstimates combined{0.05, 0.7};
  double prev = INFINITY;
  for (double target = 3.0; target <= 9.0; target += 0.5) {
    cfg.target_level = target;
    const auto r = algorithm1(ems, cfg, combined);
    CHECK(r.point <= prev);
    prev = r.point;
  }
}

TEST_CASE("cluster simulation corners") {
  const auto base = exact_emulator(1.0, 1.0, 0.0, 0.05, 36500, 1000);
  // Laplace image of the threshold is -log(2 pi) = 2.30; every start lies above q = 2
  SUBCASE("no clusters") {
    auto em = with_cev(exact_emulator(1.0, 1.0, 0.0, 0.05, 36500, 0), CEVModel{.q_threshold = 2.0, .residuals = {0.0}});
    auto rng = make_stream(1, "cl");
    CHECK(simulate_cluster_run(em, 3.0, rng) == 0);
  }
  SUBCASE("constant chains count the starts above the target") {
    const auto em = with_cev(base, CEVModel{.beta0 = 1.0, .beta1 = 0.0, .q_threshold = 2.0, .residuals = {0.0}});
    const double target_raw = 1.0 + std::log(4.0);  // P(start above) = 1/4
    const double target_lap = to_laplace(target_raw, 1, em.mixed);
    auto rng = make_stream(2, "cl");
    double total = 0.0;
    const int runs = 100;
    for (int r = 0; r < runs; ++r) total += simulate_cluster_run(em, target_lap, rng);
    const double expect = 1000.0 * 0.25;
    CHECK(std::abs(total / runs - expect) < 4.0 * std::sqrt(expect / runs) + 1.0);
  }
  SUBCASE("independence corner") {
    // residuals above the target with probability 0.1, Y_{j+1} = Z_{j+1}
    std::vector<double> res(10, 0.0);
    res[3] = 5.0;
    const auto em = with_cev(base, CEVModel{.beta0 = 0.0, .beta1 = 0.0, .q_threshold = 2.0, .residuals = res});
    auto rng = make_stream(3, "cl");
    double total = 0.0;
    const int runs = 100;
    for (int r = 0; r < runs; ++r) total += simulate_cluster_run(em, 1.0, rng);
    const double frac = total / (runs * 1000.0);
    CHECK(frac >= 0.1 - 0.02);
    CHECK(frac == doctest::Approx(persistence_prob(0.1, 30)).epsilon(0.05));
  }
  SUBCASE("missing CEV model") {
    auto rng = make_stream(4, "cl");
    CHECK_THROWS(simulate_cluster_run(base, 3.0, rng));
  }
}

TEST_CASE("Laplace targets follow the exact margins") {
  const auto em = exact_emulator(1.0, 2.0, 0.0, 0.05, 36500, 10);
  const auto t = laplace_targets(em, 3.0);
  const double expect = laplace_quantile(1.0 - 0.05 * std::exp(-1.0));
  for (double v : t) CHECK(v == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("run_question end to end on a small synthetic ensemble") {
  SynthSpec spec = SynthSpec::uniform_months(1.0, 1.0, 0.0);
  spec.n_runs = 2;
  spec.n_days = 36500;
  spec.n_sites = 5;
  spec.seed = 3;
  const auto runs = generate_ensemble(spec);
  SimulationConfig cfg = base_config(100, 50, 2);
  cfg.target_level = 1.0 + std::log(100.0);
  cfg.sim_days = 1000;
  FitConfig fit;
  fit.shape_override = ShapeMode::constant;
  const auto r = run_question(Question::q1, runs, cfg, fit);
  CHECK(r.point > 0.2);
  CHECK(r.point < 1.0);
  CHECK(r.theta_hat > 0.95);
  const auto ems = fit_emulators(runs, Question::q1, fit);
  CHECK(ems.size() == 2);
  CHECK(ems[1].run_id == 2);
  CHECK_FALSE(ems[0].cev.has_value());
}

TEST_CASE("persistence pipeline") {
  SynthSpec spec = SynthSpec::uniform_months(1.0, 1.0, 0.0);
  spec.n_runs = 1;
  spec.n_days = 36500;
  spec.n_sites = 25;
  spec.order_k = 23;
  spec.mean_cluster_size = 1.6;
  spec.seed = 4;
  const auto runs = generate_ensemble(spec);
  const auto em = build_emulator(runs[0], Question::q3);
  REQUIRE(em.cev.has_value());
  CHECK(em.order_k == 23);
  CHECK(em.gp_model().shape_mode == ShapeMode::constant);
  auto cfg = base_config(50, 10, 3);
  cfg.question = Question::q3;
  cfg.target_level = 3.0;
  const auto r = algorithm1(std::vector<RunEmulator>{em}, cfg, combine_rates(std::vector<RunEmulator>{em}));
  CHECK(r.point > 0.0);
  CHECK(r.c_samples == r.mean_e_samples);
}

} // TEST_SUITE
