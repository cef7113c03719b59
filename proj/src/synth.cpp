#include "extremes/synth.hpp"

#include "extremes/gpd.hpp"
#include "extremes/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace extremes {

SynthSpec SynthSpec::uniform_months(double u, double sigma, double xi) {
  SynthSpec s;
  s.threshold.fill(u);
  s.sigma.fill(sigma);
  s.xi.fill(xi);
  return s;
}

namespace {

double mean_gap(const SynthSpec& s) {
  return s.mean_cluster_size * (1.0 - s.exceed_prob) / s.exceed_prob;
}

} // namespace

void validate(const SynthSpec& s) {
  if (s.n_runs < 1) throw std::invalid_argument("synth: runs must be >= 1");
  if (s.n_days < 1) throw std::invalid_argument("synth: days must be >= 1");
  if (s.n_sites < 1) throw std::invalid_argument("synth: sites must be >= 1");
  if (s.order_k < 1 || static_cast<std::size_t>(s.order_k) > s.n_sites)
    throw std::invalid_argument("synth: order_k must lie in 1..sites");
  if (!(s.exceed_prob > 0.0 && s.exceed_prob < 1.0))
    throw std::invalid_argument("synth: exceed_prob must lie in (0, 1)");
  if (!(s.mean_cluster_size >= 1.0)) throw std::invalid_argument("synth: mean cluster size must be >= 1");
  if (s.min_gap < 1) throw std::invalid_argument("synth: min_gap must be >= 1");
  if (!(mean_gap(s) > s.min_gap))
    throw std::invalid_argument("synth: min_gap too large for the requested exceedance rate");
  if (!(s.bulk_floor >= 0.0 && s.bulk_floor < 1.0))
    throw std::invalid_argument("synth: bulk_floor must lie in [0, 1)");
  for (int m = 0; m < 12; ++m) {
    if (!(s.threshold[m] > 0.0)) throw std::invalid_argument("synth: thresholds must be positive");
    if (!(s.sigma[m] > 0.0)) throw std::invalid_argument("synth: GP scales must be positive");
    if (!(s.xi[m] > -1.0 && s.xi[m] < 1.0)) throw std::invalid_argument("synth: GP shapes must lie in (-1, 1)");
  }
}

SummarySeries generate_latent_series(const SynthSpec& spec, int run_index) {
  validate(spec);
  auto rng = make_stream(spec.seed, "synth_latent", static_cast<std::uint64_t>(run_index));
  const double p_size = 1.0 / spec.mean_cluster_size;
  const double p_gap = 1.0 / (1.0 + mean_gap(spec) - spec.min_gap);
  std::geometric_distribution<std::size_t> extra_members(std::min(p_size, 1.0 - 1e-12));
  std::geometric_distribution<std::size_t> extra_gap(p_gap);
  std::geometric_distribution<std::size_t> first_gap(1.0 / (1.0 + mean_gap(spec)));

  SummarySeries s;
  s.run_id = run_index + 1;
  s.order_k = spec.order_k;
  s.months = spec.calendar.fold(spec.n_days);
  s.values.resize(spec.n_days);

  std::size_t i = 0;
  auto bulk_until = [&](std::size_t end) {
    for (; i < end && i < spec.n_days; ++i) {
      const double u = spec.threshold[s.months[i] - 1u];
      s.values[i] = u * (spec.bulk_floor + (1.0 - spec.bulk_floor) * uniform_open(rng));
    }
  };
  bulk_until(first_gap(rng));
  while (i < spec.n_days) {
    const std::size_t size = 1 + (spec.mean_cluster_size > 1.0 ? extra_members(rng) : 0);
    for (std::size_t j = 0; j < size && i < spec.n_days; ++j, ++i) {
      const int m = s.months[i];
      s.values[i] = spec.threshold[m - 1] + gp_sample(rng, spec.sigma[m - 1], spec.xi[m - 1]);
    }
    bulk_until(i + static_cast<std::size_t>(spec.min_gap) + extra_gap(rng));
  }
  return s;
}

EnsembleRun expand_to_sites(const SummarySeries& latent, const SynthSpec& spec, int run_index) {
  auto rng = make_stream(spec.seed, "synth_sites", static_cast<std::uint64_t>(run_index));
  std::exponential_distribution<double> above(1.0);
  const std::size_t S = spec.n_sites;
  const auto k = static_cast<std::size_t>(spec.order_k);
  std::vector<double> values(latent.size() * S);
  std::vector<double> row(S);
  for (std::size_t d = 0; d < latent.size(); ++d) {
    const double x = latent.values[d];
    for (std::size_t j = 0; j + 1 < k; ++j) row[j] = x * uniform_open(rng);
    row[k - 1] = x;
    for (std::size_t j = k; j < S; ++j) row[j] = x + above(rng);
    // scatter so the order statistic is not always in the same column
    std::shuffle(row.begin(), row.end(), rng);
    std::copy(row.begin(), row.end(), values.begin() + static_cast<std::ptrdiff_t>(d * S));
  }
  return EnsembleRun(run_index + 1, S, std::move(values), spec.calendar);
}

std::vector<EnsembleRun> generate_ensemble(const SynthSpec& spec) {
  validate(spec);
  std::vector<EnsembleRun> runs;
  runs.reserve(static_cast<std::size_t>(spec.n_runs));
  for (int r = 0; r < spec.n_runs; ++r)
    runs.push_back(expand_to_sites(generate_latent_series(spec, r), spec, r));
  return runs;
}

namespace {

// P(at least two consecutive successes among `size` Bernoulli(p) trials).
double consecutive_pair_prob(std::size_t size, double p) {
  // a: no pair so far and last trial failed (or none); b: no pair, last
  // succeeded; c: a pair has occurred
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  for (std::size_t t = 0; t < size; ++t) {
    const double na = (a + b) * (1.0 - p);
    const double nb = a * p;
    c += b * p;
    a = na;
    b = nb;
  }
  return c;
}

} // namespace

SynthTruth synth_truth(const SynthSpec& spec, double level, std::size_t horizon) {
  validate(spec);
  SynthTruth t;
  t.level = level;
  t.horizon = horizon == 0 ? spec.n_days : horizon;
  t.theta = 1.0 / spec.mean_cluster_size;
  const double pi = spec.exceed_prob;

  MonthArray p_member{};  // P(an exceedance day of month m is above level)
  for (int m = 0; m < 12; ++m) {
    const double u = spec.threshold[m];
    if (level >= u) {
      p_member[m] = gp_survival(level - u, spec.sigma[m], spec.xi[m]);
      t.day_prob_by_month[m] = pi * p_member[m];
    } else {
      p_member[m] = 1.0;
      const double lo = spec.bulk_floor * u;
      const double bulk_above = std::clamp((u - level) / (u - lo), 0.0, 1.0);
      t.day_prob_by_month[m] = pi + (1.0 - pi) * bulk_above;
    }
  }

  const auto& lengths = spec.calendar.month_lengths();
  for (int m = 0; m < 12; ++m) t.mean_day_prob += lengths[m] * t.day_prob_by_month[m];
  t.mean_day_prob /= spec.calendar.days_per_year();

  // Persistence probability per cluster, by month: size ~ 1 + Geometric.
  MonthArray persist{};
  const double q = 1.0 - 1.0 / spec.mean_cluster_size;  // P(extra member)
  for (int m = 0; m < 12; ++m) {
    double weight = 1.0 - q;  // P(size = 1)
    double total = 0.0;
    for (std::size_t size = 1; size < 4000 && weight > 1e-16; ++size) {
      total += weight * consecutive_pair_prob(size, p_member[m]);
      weight *= q;
    }
    persist[m] = total;
  }

  const double cluster_rate = pi / spec.mean_cluster_size;  // cluster starts per day
  for (auto m : spec.calendar.fold(t.horizon)) {
    t.expected_event_days += t.day_prob_by_month[m - 1u];
    t.expected_persistent_clusters += cluster_rate * persist[m - 1u];
  }
  return t;
}

} // namespace extremes
