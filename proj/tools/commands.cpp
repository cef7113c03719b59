#include "commands.hpp"

#include "extremes/error.hpp"
#include "extremes/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace extremes::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

class CsvWriter {
public:
  CsvWriter(const fs::path& path, std::initializer_list<std::string_view> columns)
      : path_(path), out_(path) {
    if (!out_) throw InputError("cannot write " + path.string());
    bool first = true;
    for (auto c : columns) {
      out_ << (first ? "" : ",") << c;
      first = false;
    }
    out_ << '\n';
  }
  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      out_ << (first ? "" : ",") << num(v);
      first = false;
    }
    out_ << '\n';
  }
  void close() {
    out_.close();
    if (!out_) throw InputError("write failed: " + path_.string());
  }

private:
  fs::path path_;
  std::ofstream out_;
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string run_stem(int run_id) { return "run" + std::to_string(run_id); }

fs::path emulator_dir(const RunConfig& c) { return c.emulators.empty() ? c.out : c.emulators; }

} // namespace

std::vector<RunEmulator> load_emulators(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("emulator directory not found: " + dir.string());
  std::vector<RunEmulator> emulators;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (!entry.is_regular_file() || !name.ends_with("_emulator.json")) continue;
    emulators.push_back(emulator_from_json(read_json(entry.path())));
  }
  if (emulators.empty()) throw InputError("no *_emulator.json files in " + dir.string());
  std::sort(emulators.begin(), emulators.end(),
            [](const RunEmulator& a, const RunEmulator& b) { return a.run_id < b.run_id; });
  return emulators;
}

void cmd_fit(const RunConfig& config, std::ostream& log) {
  validate(config, true);
  std::vector<EnsembleRun> runs;
  runs.reserve(config.runs.size());
  for (std::size_t r = 0; r < config.runs.size(); ++r)
    runs.push_back(load_run(config.runs[r], static_cast<int>(r + 1), config.calendar,
                            LoadOptions{config.header}));
  validate_ensemble(runs);
  ensure_dir(config.out);

  log << "question " << question_name(config.question) << ", " << runs.size() << " runs\n";
  log << std::left << std::setw(5) << "run" << std::setw(11) << "u_min" << std::setw(11) << "u_max"
      << std::setw(9) << "clusters" << std::setw(11) << "pi_star" << std::setw(9) << "theta"
      << std::setw(11) << "sigma_jan" << std::setw(9) << "xi_jan";
  if (question_spec(config.question).persistence) log << std::setw(9) << "beta0" << "beta1";
  log << '\n';

  for (const auto& run : runs) {
    RunEmulator em = [&] {
      try {
        return build_emulator(run, config.question, config.fit);
      } catch (const FitError& e) {
        throw FitError(std::string("fit stage failed for run ") + std::to_string(run.run_id()) + ": " + e.what());
      } catch (const std::domain_error& e) {
        throw FitError(std::string("fit stage failed for run ") + std::to_string(run.run_id()) + ": " + e.what());
      }
    }();
    const auto stem = run_stem(em.run_id);
    write_json(config.out / (stem + "_threshold.json"), to_json(em.threshold_model()));
    write_json(config.out / (stem + "_gp.json"), to_json(em.gp_model()));
    write_json(config.out / (stem + "_clusters.json"), to_json(em.clusters));
    if (em.cev) write_json(config.out / (stem + "_cev.json"), to_json(*em.cev));
    write_json(config.out / (stem + "_emulator.json"), to_json(em));

    const auto& u = em.threshold_model().u_by_month;
    const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    std::ostringstream row;
    row << std::left << std::setprecision(4) << std::setw(5) << em.run_id << std::setw(11) << *lo
        << std::setw(11) << *hi << std::setw(9) << em.clusters.n_clusters() << std::setw(11)
        << em.clusters.pi_star_hat << std::setw(9)
        << (em.clusters.theta_hat ? num(std::round(*em.clusters.theta_hat * 1e4) / 1e4) : "-")
        << std::setw(11) << em.gp_model().sigma(1) << std::setw(9) << em.gp_model().shape(1);
    if (em.cev) row << std::setw(9) << em.cev->beta0 << em.cev->beta1;
    log << row.str() << '\n';
  }
}

void cmd_estimate(const RunConfig& config, std::ostream& log) {
  validate(config, false);
  const auto emulators = load_emulators(emulator_dir(config));
  for (const auto& em : emulators) {
    if (em.question != config.question)
      throw InputError("emulator for run " + std::to_string(em.run_id) + " was fitted for " +
                       std::string(question_name(em.question)) + ", not " +
                       std::string(question_name(config.question)));
  }
  ensure_dir(config.out);

  SimulationConfig sim = config.sim;
  sim.question = config.question;
  const auto combined = combine_rates(emulators);
  const EstimateResult result = algorithm1(emulators, sim, combined);

  const std::string qname(question_name(config.question));
  EstimateMeta meta;
  meta.question = config.question;
  meta.n_sim = sim.n_sim;
  meta.n_srun = sim.n_srun;
  meta.seed = sim.seed;
  meta.alpha = sim.alpha;
  meta.target = std::isnan(sim.target_level) ? question_spec(config.question).target : sim.target_level;
  if (config.dump_samples) {
    const std::string name = "c_samples_" + qname + ".csv";
    CsvWriter csv(config.out / name, {"t_sim", "c", "mean_e"});
    for (std::size_t t = 0; t < result.c_samples.size(); ++t)
      csv.row({static_cast<double>(t + 1), result.c_samples[t], result.mean_e_samples[t]});
    csv.close();
    meta.c_samples_path = name;
  }
  write_json(config.out / ("estimate_" + qname + ".json"), to_json(result, meta));

  std::ostringstream row;
  row << std::fixed << std::setprecision(3) << qname << " | " << result.point << " | ("
      << result.ci_low << ", " << result.ci_high << ")";
  log << row.str() << '\n';
}

void cmd_synth(const SynthConfig& config, std::ostream& log) {
  try {
    validate(config.spec);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("synth: ") + e.what());
  }
  ensure_dir(config.out);
  const auto runs = generate_ensemble(config.spec);
  for (const auto& run : runs) {
    const auto path = config.out / ("run_" + std::to_string(run.run_id()) + ".csv");
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    write_run(run, out);
    out.close();
    if (!out) throw InputError("write failed: " + path.string());
  }

  const auto& s = config.spec;
  Json truth;
  truth["n_runs"] = s.n_runs;
  truth["n_days"] = s.n_days;
  truth["n_sites"] = s.n_sites;
  truth["order_k"] = s.order_k;
  truth["exceed_prob"] = s.exceed_prob;
  truth["threshold"] = s.threshold;
  truth["sigma"] = s.sigma;
  truth["xi"] = s.xi;
  truth["mean_cluster_size"] = s.mean_cluster_size;
  truth["min_gap"] = s.min_gap;
  truth["bulk_floor"] = s.bulk_floor;
  truth["month_lengths"] = s.calendar.month_lengths();
  truth["seed"] = s.seed;
  truth["levels"] = Json::array();
  for (double level : config.targets) {
    try {
      truth["levels"].push_back(to_json(synth_truth(s, level, config.horizon)));
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("synth truth: ") + e.what());
    }
  }
  write_json(config.out / "truth.json", truth);
  log << "wrote " << runs.size() << " runs of " << s.n_days << " days x " << s.n_sites
      << " sites to " << config.out.string() << '\n';
}

void cmd_diagnose(const RunConfig& config, std::ostream& log) {
  validate(config, false);
  const auto emulators = load_emulators(emulator_dir(config));
  ensure_dir(config.out);

  for (const auto& em : emulators) {
    const auto stem = run_stem(em.run_id);
    const auto& thr = em.threshold_model();

    CsvWriter table(config.out / (stem + "_thresholds.csv"), {"month", "u", "zeta", "sigma", "xi"});
    for (int m = 1; m <= 12; ++m)
      table.row({static_cast<double>(m), thr.u_by_month[m - 1], std::exp(thr.log_zeta_by_month[m - 1]),
                 em.gp_model().sigma(m), em.gp_model().shape(m)});
    table.close();

    if (em.clusters.n_clusters() == 0) {
      log << "warning: run " << em.run_id << " has no clusters; QQ file not written\n";
    } else {
      const auto qq = qq_exponential(em.gp_model(), em.clusters);
      const auto env = qq_envelope(em.gp_model(), em.clusters, config.envelope_replicates,
                                   derive_seed(config.sim.seed, "diagnose.envelope",
                                               static_cast<std::uint64_t>(em.run_id)),
                                   config.sim.alpha);
      CsvWriter csv(config.out / (stem + "_qq.csv"), {"theoretical", "empirical", "lower", "upper"});
      std::size_t outside = 0;
      for (std::size_t i = 0; i < qq.size(); ++i) {
        csv.row({qq[i].theoretical, qq[i].empirical, env.lower[i], env.upper[i]});
        if (qq[i].empirical < env.lower[i] || qq[i].empirical > env.upper[i]) ++outside;
      }
      csv.close();
      log << "run " << em.run_id << ": " << outside << " of " << qq.size()
          << " QQ points outside the envelope\n";
    }

    if (!em.cev) continue;
    SummarySeries series;
    series.run_id = em.run_id;
    series.order_k = em.order_k;
    series.values = em.series;
    series.months = em.calendar.fold(em.series.size());
    const auto lap = to_laplace(series, em.mixed);

    CsvWriter scatter(config.out / (stem + "_cev_scatter.csv"), {"x", "x_next", "x_laplace", "x_next_laplace"});
    for (std::size_t i = 0; i + 1 < series.size(); ++i)
      scatter.row({series.values[i], series.values[i + 1], lap.values[i], lap.values[i + 1]});
    scatter.close();

    const double x_max = *std::max_element(lap.values.begin(), lap.values.end());
    const auto band = cev_band(*em.cev, x_max, 100, 1.0 - config.sim.alpha);
    CsvWriter fit(config.out / (stem + "_cev_fit.csv"), {"x", "mean"});
    CsvWriter bands(config.out / (stem + "_cev_band.csv"), {"x", "lower", "upper"});
    for (const auto& p : band) {
      fit.row({p.x, p.mean});
      bands.row({p.x, p.lower, p.upper});
    }
    fit.close();
    bands.close();
  }
  log << "diagnostics for " << emulators.size() << " runs written to " << config.out.string() << '\n';
}

} // namespace extremes::cli
