#pragma once

#include "extremes/cev.hpp"
#include "extremes/decluster.hpp"
#include "extremes/gpd.hpp"
#include "extremes/ingest.hpp"
#include "extremes/threshold.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace extremes {

enum class Question { q1, q2, q3 };

struct QuestionSpec {
  Question question;
  int order_k;         // spatial order statistic (25 sites)
  double target;       // event level
  ShapeMode shape;     // GP shape parametrisation
  bool persistence;    // two-or-more consecutive days, simulated by chains
};

/// Q1: all 25 sites above 1.7 (spatial minimum, month-varying shape).
/// Q2: at least 6 sites above 5.7 (20th order statistic, constant shape).
/// Q3: at least 3 sites above 5.0 on two or more consecutive days (23rd).
QuestionSpec question_spec(Question q);
std::string_view question_name(Question q);
/// Accepts "q1", "q2", "q3" (case-insensitive). Throws std::invalid_argument.
Question parse_question(std::string_view name);

struct FitConfig {
  ThresholdOptions threshold;
  int run_length = 3;
  GPFitOptions gp;
  std::optional<ShapeMode> shape_override;
  BulkMode bulk_mode = BulkMode::pooled;
  CEVFitOptions cev;
  std::optional<int> order_override;
};

/// Fitted generative model of one run for one question.
struct RunEmulator {
  int run_id = 0;
  Question question = Question::q1;
  int order_k = 1;
  Calendar calendar = Calendar::noleap();
  std::vector<double> series;  // training summary series
  ClusterSet clusters;
  MixedDistribution mixed;
  std::optional<CEVModel> cev;

  const ThresholdModel& threshold_model() const noexcept { return mixed.thresholds(); }
  const GPModel& gp_model() const noexcept { return mixed.gp(); }
  std::size_t n_days() const noexcept { return series.size(); }
  /// Days per month over a horizon of `days` days (index 0 = January).
  std::array<std::size_t, 12> month_counts(std::size_t days) const;
};

/// Summary series, threshold, declustering, GP tail and mixed distribution;
/// for persistence questions also the Laplace transform and CEV fit.
RunEmulator build_emulator(const EnsembleRun& run, Question question, const FitConfig& config = {});

std::vector<RunEmulator> fit_emulators(std::span<const EnsembleRun> runs, Question question,
                                       const FitConfig& config = {});

struct CombinedEstimates {
  double pi_hat = 0.0;
  double theta_hat = 1.0;
};

/// Means of the per-run declustered rates and extremal indices. Runs with no
/// exceedances contribute to pi_hat but not to theta_hat. Throws
/// std::domain_error when no run has a defined extremal index.
CombinedEstimates combine_rates(std::span<const RunEmulator> emulators);

enum class MarginalSampler {
  per_day,     // Bernoulli(pi) per day then a GP magnitude per selected day
  aggregated,  // same law via per-month binomial counts
};

struct SimulationConfig {
  int n_sim = 10000;
  int n_srun = 50;
  double target_level = std::numeric_limits<double>::quiet_NaN();  // NaN: question default
  Question question = Question::q1;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  Correction correction = Correction::power;
  bool rate_mode = false;          // e~ is the indicator "at least one event"
  std::size_t sim_days = 0;        // simulated run length; 0 = training length
  MarginalSampler sampler = MarginalSampler::aggregated;
  int chain_steps = 30;
  int threads = 1;                 // 0 = hardware concurrency
};

struct EstimateResult {
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<double> c_samples;
  std::vector<double> mean_e_samples;
  double theta_hat = 1.0;
  double pi_hat = 0.0;
};

/// Number of simulated days in a run of `days` days (0 = training length)
/// whose simulated value exceeds `target`. Throws std::domain_error when the
/// target does not exceed every monthly threshold.
std::size_t simulate_marginal_run(const RunEmulator& emulator, double pi_hat, double target,
                                  Rng& rng, MarginalSampler sampler = MarginalSampler::aggregated,
                                  std::size_t days = 0);

/// Number of simulated clusters whose extremal chain stays above the target
/// (Laplace scale, by month of the cluster) on two consecutive steps. The
/// cluster count is Poisson with the run's cluster count scaled to `days`.
std::size_t simulate_cluster_run(const RunEmulator& emulator,
                                 const std::array<double, 12>& target_laplace, Rng& rng,
                                 std::size_t days = 0, int steps = 30);
std::size_t simulate_cluster_run(const RunEmulator& emulator, double target_laplace, Rng& rng,
                                 std::size_t days = 0, int steps = 30);

/// Laplace-scale image of a raw level under the emulator's margins, by month.
std::array<double, 12> laplace_targets(const RunEmulator& emulator, double target);

/// Monte Carlo over synthetic ensembles: each of n_sim ensembles holds n_srun
/// runs drawn uniformly from the emulators. Each t_sim uses its own stream
/// derived from (seed, t_sim), so results do not depend on `threads`.
EstimateResult algorithm1(std::span<const RunEmulator> emulators, const SimulationConfig& config,
                          const CombinedEstimates& combined);

/// Full pipeline for one question on a validated ensemble.
EstimateResult run_question(Question question, std::span<const EnsembleRun> runs,
                            SimulationConfig config, const FitConfig& fit = {});

/// Inverse-CDF binomial draw from a single uniform; monotone in p for fixed u.
std::size_t binomial_inverse(std::size_t n, double p, double u);

} // namespace extremes
