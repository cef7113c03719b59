#include "extremes/ensemble.hpp"

#include "extremes/error.hpp"
#include "extremes/summarise.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

namespace extremes {

QuestionSpec question_spec(Question q) {
  switch (q) {
  case Question::q1: return {q, 1, 1.7, ShapeMode::by_month, false};
  case Question::q2: return {q, 20, 5.7, ShapeMode::constant, false};
  case Question::q3: return {q, 23, 5.0, ShapeMode::constant, true};
  }
  throw std::invalid_argument("unknown question");
}

std::string_view question_name(Question q) {
  switch (q) {
  case Question::q1: return "q1";
  case Question::q2: return "q2";
  case Question::q3: return "q3";
  }
  return "?";
}

Question parse_question(std::string_view name) {
  std::string s(name);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "q1" || s == "1") return Question::q1;
  if (s == "q2" || s == "2") return Question::q2;
  if (s == "q3" || s == "3") return Question::q3;
  throw std::invalid_argument("unknown question '" + std::string(name) + "' (expected q1, q2 or q3)");
}

std::array<std::size_t, 12> RunEmulator::month_counts(std::size_t days) const {
  std::array<std::size_t, 12> counts{};
  for (auto m : calendar.fold(days == 0 ? n_days() : days)) ++counts[m - 1u];
  return counts;
}

RunEmulator build_emulator(const EnsembleRun& run, Question question, const FitConfig& config) {
  const QuestionSpec spec = question_spec(question);
  const int k = config.order_override.value_or(spec.order_k);
  SummarySeries series = spatial_order_statistic(run, k);
  ThresholdModel thr = fit_threshold(series, config.threshold);
  ClusterSet cs = run_decluster(series, thr, config.run_length);
  if (cs.n_clusters() == 0)
    throw FitError("run " + std::to_string(run.run_id()) + ": no threshold exceedances");
  GPModel gp = fit_gp(cs, thr, config.shape_override.value_or(spec.shape), config.gp);
  MixedDistribution md(series.values, series.months, cs.pi_star_hat, std::move(gp),
                       config.bulk_mode);

  std::optional<CEVModel> cev;
  if (spec.persistence) cev = fit_cev(to_laplace(series, md), config.cev);

  return RunEmulator{run.run_id(), question, k, run.calendar(), std::move(series.values),
                     std::move(cs), std::move(md), std::move(cev)};
}

std::vector<RunEmulator> fit_emulators(std::span<const EnsembleRun> runs, Question question,
                                       const FitConfig& config) {
  validate_ensemble(runs);
  std::vector<RunEmulator> out;
  out.reserve(runs.size());
  for (const auto& run : runs) out.push_back(build_emulator(run, question, config));
  return out;
}

CombinedEstimates combine_rates(std::span<const RunEmulator> emulators) {
  if (emulators.empty()) throw std::invalid_argument("no emulators to combine");
  double pi = 0.0;
  double theta = 0.0;
  std::size_t defined = 0;
  for (const auto& e : emulators) {
    pi += e.clusters.pi_star_hat;
    if (e.clusters.theta_hat) {
      theta += *e.clusters.theta_hat;
      ++defined;
    }
  }
  if (defined == 0) throw std::domain_error("no run has a defined extremal index");
  return {pi / static_cast<double>(emulators.size()), theta / static_cast<double>(defined)};
}

std::size_t binomial_inverse(std::size_t n, double p, double u) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - binomial_inverse(n, 1.0 - p, 1.0 - u);
  const double log_p0 = static_cast<double>(n) * std::log1p(-p);
  if (log_p0 < -700.0) {
    // (1-p)^n underflows: normal approximation, inverted by bisection so the
    // draw stays monotone in u and p
    const double mean = static_cast<double>(n) * p;
    const double sd = std::sqrt(mean * (1.0 - p));
    double lo = -40.0;
    double hi = 40.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (0.5 * std::erfc(-mid / std::numbers::sqrt2) < u ? lo : hi) = mid;
    }
    const double x = std::floor(mean + sd * 0.5 * (lo + hi) + 0.5);
    return static_cast<std::size_t>(std::clamp(x, 0.0, static_cast<double>(n)));
  }
  double pmf = std::exp(log_p0);
  double cdf = pmf;
  const double ratio = p / (1.0 - p);
  std::size_t k = 0;
  while (cdf < u && k < n) {
    pmf *= static_cast<double>(n - k) / static_cast<double>(k + 1) * ratio;
    ++k;
    cdf += pmf;
  }
  return k;
}

namespace {

void check_target_above_thresholds(const RunEmulator& em, double target) {
  for (int m = 1; m <= 12; ++m) {
    if (!(target > threshold_at(em.threshold_model(), m))) {
      std::ostringstream msg;
      msg << "target " << target << " does not exceed the month-" << m << " threshold "
          << threshold_at(em.threshold_model(), m) << " of run " << em.run_id
          << "; the GP tail cannot express this event, evaluate it with the mixed distribution";
      throw std::domain_error(msg.str());
    }
  }
}

} // namespace

std::size_t simulate_marginal_run(const RunEmulator& em, double pi_hat, double target, Rng& rng,
                                  MarginalSampler sampler, std::size_t days) {
  if (!(pi_hat >= 0.0 && pi_hat <= 1.0)) throw std::domain_error("pi_hat must lie in [0, 1]");
  check_target_above_thresholds(em, target);
  const GPModel& gp = em.gp_model();
  const ThresholdModel& thr = em.threshold_model();
  const std::size_t horizon = days == 0 ? em.n_days() : days;

  std::size_t events = 0;
  if (sampler == MarginalSampler::per_day) {
    const auto months = em.calendar.fold(horizon);
    std::bernoulli_distribution exceed(pi_hat);
    for (auto m8 : months) {
      if (!exceed(rng)) continue;
      const int m = m8;
      const double x = thr.u_by_month[m - 1] + gp_sample(rng, gp.sigma(m), gp.shape(m));
      if (x > target) ++events;
    }
    return events;
  }

  const auto counts = em.month_counts(horizon);
  for (int m = 1; m <= 12; ++m) {
    std::binomial_distribution<std::size_t> selected(counts[m - 1], pi_hat);
    const std::size_t k = selected(rng);
    const double p_tail = gp_survival(target - thr.u_by_month[m - 1], gp.sigma(m), gp.shape(m));
    events += binomial_inverse(k, p_tail, uniform_open(rng));
  }
  return events;
}

std::array<double, 12> laplace_targets(const RunEmulator& em, double target) {
  std::array<double, 12> out{};
  for (int m = 1; m <= 12; ++m) out[m - 1] = to_laplace(target, m, em.mixed);
  return out;
}

std::size_t simulate_cluster_run(const RunEmulator& em, const std::array<double, 12>& target_laplace,
                                 Rng& rng, std::size_t days, int steps) {
  if (!em.cev) throw std::logic_error("run " + std::to_string(em.run_id) + " has no CEV model");
  const CEVModel& cev = *em.cev;
  const double n_r = static_cast<double>(em.clusters.n_clusters());
  const std::size_t horizon = days == 0 ? em.n_days() : days;
  const double rate = n_r * static_cast<double>(horizon) / static_cast<double>(em.n_days());
  if (!(rate > 0.0)) return 0;

  std::poisson_distribution<std::size_t> n_clusters(rate);
  const auto by_month = em.clusters.clusters_by_month();
  std::discrete_distribution<int> month_of(by_month.begin(), by_month.end());
  const GPModel& gp = em.gp_model();
  const ThresholdModel& thr = em.threshold_model();

  const std::size_t k = n_clusters(rng);
  std::size_t events = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const int m = month_of(rng) + 1;
    const double x0 = thr.u_by_month[m - 1] + gp_sample(rng, gp.sigma(m), gp.shape(m));
    const double y0 = to_laplace(x0, m, em.mixed);
    // Starts at or below the conditioning level lie outside the fitted model.
    if (!(y0 > cev.q_threshold)) continue;
    const auto chain = simulate_chain(cev, y0, steps, rng);
    if (persists_above(chain, target_laplace[m - 1])) ++events;
  }
  return events;
}

std::size_t simulate_cluster_run(const RunEmulator& em, double target_laplace, Rng& rng,
                                 std::size_t days, int steps) {
  std::array<double, 12> t;
  t.fill(target_laplace);
  return simulate_cluster_run(em, t, rng, days, steps);
}

namespace {

struct SimContext {
  std::span<const RunEmulator> emulators;
  const SimulationConfig& config;
  const CombinedEstimates& combined;
  double target;
  bool persistence;
  std::vector<std::array<double, 12>> laplace;  // per emulator, persistence only
};

double mean_events(const SimContext& ctx, int t_sim) {
  auto rng = make_stream(ctx.config.seed, "algorithm1", static_cast<std::uint64_t>(t_sim));
  std::uniform_int_distribution<std::size_t> pick(0, ctx.emulators.size() - 1);
  double total = 0.0;
  for (int t = 0; t < ctx.config.n_srun; ++t) {
    const std::size_t r = pick(rng);
    const RunEmulator& em = ctx.emulators[r];
    std::size_t e = ctx.persistence
                        ? simulate_cluster_run(em, ctx.laplace[r], rng, ctx.config.sim_days,
                                               ctx.config.chain_steps)
                        : simulate_marginal_run(em, ctx.combined.pi_hat, ctx.target, rng,
                                                ctx.config.sampler, ctx.config.sim_days);
    if (ctx.config.rate_mode) e = e > 0 ? 1 : 0;
    total += static_cast<double>(e);
  }
  return total / static_cast<double>(ctx.config.n_srun);
}

double corrected(const SimContext& ctx, double e_bar) {
  if (ctx.persistence) return e_bar;
  if (ctx.config.correction == Correction::power && e_bar > 1.0) {
    std::ostringstream msg;
    msg << "mean simulated count per run is " << e_bar
        << " > 1, so the power declustering correction is undefined; use rate mode, the "
           "multiplicative correction, or a shorter simulated run length";
    throw FitError(msg.str());
  }
  return apply_correction(e_bar, ctx.combined.theta_hat, ctx.config.correction);
}

} // namespace

EstimateResult algorithm1(std::span<const RunEmulator> emulators, const SimulationConfig& config,
                          const CombinedEstimates& combined) {
  if (emulators.empty()) throw std::invalid_argument("algorithm1: no emulators");
  if (config.n_sim < 1 || config.n_srun < 1) throw std::invalid_argument("n_sim and n_srun must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");

  const QuestionSpec spec = question_spec(config.question);
  SimContext ctx{emulators, config, combined,
                 std::isnan(config.target_level) ? spec.target : config.target_level,
                 spec.persistence, {}};
  if (ctx.persistence)
    for (const auto& em : emulators) ctx.laplace.push_back(laplace_targets(em, ctx.target));

  EstimateResult result;
  result.theta_hat = ctx.persistence ? 1.0 : combined.theta_hat;
  result.pi_hat = combined.pi_hat;
  result.c_samples.resize(static_cast<std::size_t>(config.n_sim));
  result.mean_e_samples.resize(static_cast<std::size_t>(config.n_sim));

  auto work = [&](int t) {
    const double e_bar = mean_events(ctx, t);
    result.mean_e_samples[static_cast<std::size_t>(t)] = e_bar;
    result.c_samples[static_cast<std::size_t>(t)] = corrected(ctx, e_bar);
  };

  int threads = config.threads == 0 ? static_cast<int>(std::thread::hardware_concurrency())
                                    : config.threads;
  threads = std::clamp(threads, 1, config.n_sim);
  if (threads == 1) {
    for (int t = 0; t < config.n_sim; ++t) work(t);
  } else {
    std::exception_ptr failure;
    int failed_at = config.n_sim;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (int t = w; t < config.n_sim; t += threads) {
          try {
            work(t);
          } catch (...) {
            std::lock_guard lock(mu);
            if (t < failed_at) {
              failed_at = t;
              failure = std::current_exception();
            }
            return;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  const auto& c = result.c_samples;
  result.point = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
  std::vector<double> sorted = c;
  std::sort(sorted.begin(), sorted.end());
  result.ci_low = empirical_quantile(sorted, config.alpha / 2.0);
  result.ci_high = empirical_quantile(sorted, 1.0 - config.alpha / 2.0);
  return result;
}

EstimateResult run_question(Question question, std::span<const EnsembleRun> runs,
                            SimulationConfig config, const FitConfig& fit) {
  config.question = question;
  const auto emulators = fit_emulators(runs, question, fit);
  return algorithm1(emulators, config, combine_rates(emulators));
}

} // namespace extremes
