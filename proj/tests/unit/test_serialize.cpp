#include "doctest.h"

#include "helpers.hpp"

#include "extremes/error.hpp"
#include "extremes/serialize.hpp"
#include "extremes/synth.hpp"

#include <filesystem>

using namespace extremes;

namespace {

RunEmulator fitted(Question q, std::uint64_t seed) {
  SynthSpec spec = SynthSpec::uniform_months(1.0, 1.0, 0.1);
  spec.n_runs = 1;
  spec.n_days = 36500;
  spec.n_sites = 25;
  spec.order_k = question_spec(q).order_k;
  spec.mean_cluster_size = 1.4;
  spec.seed = seed;
  return build_emulator(generate_ensemble(spec)[0], q);
}

} // namespace

TEST_SUITE("serialize") {

TEST_CASE("emulator round trip") {
  for (auto q : {Question::q1, Question::q3}) {
    const auto em = fitted(q, 1);
    const Json j = to_json(em);
    const auto back = emulator_from_json(j);
    CHECK(to_json(back).dump() == j.dump());
    CHECK(back.series == em.series);
    CHECK(back.clusters.maxima == em.clusters.maxima);
    CHECK(back.threshold_model().u_by_month == em.threshold_model().u_by_month);
    CHECK(back.cev.has_value() == em.cev.has_value());
    for (int m = 1; m <= 12; ++m) {
      for (double y : {0.3, 1.0, 2.5, 7.0}) CHECK(back.mixed.cdf(y, m) == em.mixed.cdf(y, m));
    }
    if (em.cev) {
      CHECK(back.cev->residuals == em.cev->residuals);
      CHECK(back.cev->beta0 == em.cev->beta0);
    }
  }
}

TEST_CASE("component schemas") {
  const auto em = fitted(Question::q3, 2);
  const Json cev = to_json(*em.cev);
  for (const char* key : {"beta0", "beta1", "q_threshold", "kde_bandwidth", "residuals"}) CHECK(cev.contains(key));
  const Json thr = to_json(em.threshold_model());
  CHECK(threshold_from_json(thr).log_zeta_by_month == em.threshold_model().log_zeta_by_month);
  const Json gp = to_json(em.gp_model());
  CHECK(gp_from_json(gp, em.threshold_model()).xi == em.gp_model().xi);
  const Json cs = to_json(em.clusters);
  const auto cs_back = clusters_from_json(cs);
  CHECK(cs_back.theta_hat == em.clusters.theta_hat);
  CHECK(cs_back.n_exceedances == em.clusters.n_exceedances);
}

TEST_CASE("estimate result schema") {
  EstimateResult r{.point = 0.2, .ci_low = 0.1, .ci_high = 0.3, .c_samples = {0.2}, .mean_e_samples = {0.2},
                   .theta_hat = 0.6, .pi_hat = 0.05};
  EstimateMeta meta{.question = Question::q2, .n_sim = 10, .n_srun = 50, .seed = 3, .alpha = 0.05,
                    .target = 5.7, .c_samples_path = ""};
  const Json j = to_json(r, meta);
  for (const char* key : {"question", "point", "ci_low", "ci_high", "n_sim", "n_srun", "seed", "theta_hat",
                          "pi_hat", "c_samples_path"})
    CHECK(j.contains(key));
  CHECK(j["question"] == "q2");
  CHECK(j["c_samples_path"].is_null());
}

TEST_CASE("file round trip and errors") {
  const auto dir = std::filesystem::temp_directory_path() / "extremes_serialize_test";
  std::filesystem::create_directories(dir);
  const Json j = to_json(fitted(Question::q1, 3).threshold_model());
  write_json(dir / "t.json", j);
  CHECK(read_json(dir / "t.json") == j);
  CHECK_THROWS_AS(read_json(dir / "missing.json"), InputError);
  CHECK_THROWS_AS(threshold_from_json(Json::object()), InputError);
  CHECK(parse_shape_mode("by_month") == ShapeMode::by_month);
  CHECK(shape_mode_name(ShapeMode::constant) == "constant");
  std::filesystem::remove_all(dir);
}

} // TEST_SUITE
