#include "commands.hpp"
#include "config.hpp"

#include "extremes/error.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <iostream>
#include <map>
#include <string>

namespace {

using namespace extremes;
using namespace extremes::cli;

constexpr int kOk = 0;
constexpr int kStatFailure = 1;
constexpr int kInputFailure = 2;

// Flags stored as raw strings and applied after the config file.
struct FlagSet {
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  std::string config_file;

  void option(CLI::App& app, const std::string& key, const std::string& help) {
    app.add_option("--" + key, values[key], help);
  }
  void flag(CLI::App& app, const std::string& key, const std::string& help) {
    app.add_flag("--" + key, switches[key], help);
  }

  template <typename Config>
  void apply(Config& config, const CLI::App& app) const {
    if (!config_file.empty())
      for (const auto& [k, v] : read_settings(config_file)) apply_setting(config, k, v);
    for (const auto& [k, v] : values)
      if (app.count("--" + k) > 0) apply_setting(config, k, v);
    for (const auto& [k, on] : switches)
      if (app.count("--" + k) > 0) apply_setting(config, k, on ? "true" : "false");
  }
};

void add_run_options(CLI::App& app, FlagSet& f) {
  app.add_option("--config", f.config_file, "key = value settings file");
  f.option(app, "question", "q1, q2 or q3");
  f.option(app, "tau", "threshold quantile level");
  f.option(app, "run-length", "declustering run length l");
  f.option(app, "q-prob", "CEV conditioning quantile");
  f.option(app, "shape-mode", "auto, constant or by_month");
  f.option(app, "bulk", "pooled or by_month bulk distribution");
  f.option(app, "order-k", "override the spatial order statistic");
  f.option(app, "n-sim", "Monte Carlo replicates");
  f.option(app, "n-srun", "runs per simulated ensemble");
  f.option(app, "seed", "master random seed");
  f.option(app, "alpha", "interval level 1 - alpha");
  f.option(app, "correction", "power or multiplicative");
  f.option(app, "sampler", "aggregated or per_day");
  f.option(app, "target", "event level (default: question level)");
  f.option(app, "sim-days", "simulated run length in days (0 = training length)");
  f.option(app, "chain-steps", "extremal chain length");
  f.option(app, "threads", "worker threads (0 = all cores)");
  f.option(app, "calendar", "noleap or 12 comma-separated month lengths");
  f.option(app, "out", "output directory");
  f.option(app, "emulators", "directory holding *_emulator.json (default: --out)");
  f.option(app, "envelope-replicates", "parametric bootstrap replicates for QQ envelopes");
  f.flag(app, "header", "run CSVs start with a header line");
  f.flag(app, "rate-mode", "treat each run's event count as an indicator");
  f.flag(app, "dump-samples", "write the c-sample CSV");
}

int run(int argc, char** argv) {
  CLI::App app{"Rare-event probabilities from climate-model ensembles"};
  app.require_subcommand(1);

  FlagSet fit_flags, est_flags, diag_flags, synth_flags;
  std::vector<std::string> fit_runs;

  auto* fit = app.add_subcommand("fit", "fit one emulator per run CSV");
  add_run_options(*fit, fit_flags);
  fit->add_option("files", fit_runs, "run CSV files");
  fit_flags.option(*fit, "runs", "comma-separated run CSV files");

  auto* est = app.add_subcommand("estimate", "Monte Carlo estimate from fitted emulators");
  add_run_options(*est, est_flags);

  auto* diag = app.add_subcommand("diagnose", "export QQ, threshold and CEV diagnostics");
  add_run_options(*diag, diag_flags);

  auto* synth = app.add_subcommand("synth", "write a synthetic ensemble with known truth");
  synth->add_option("--config", synth_flags.config_file, "key = value settings file");
  for (const char* key : {"runs", "days", "sites", "order-k", "exceed-prob", "threshold", "sigma",
                          "xi", "mean-cluster-size", "min-gap", "bulk-floor", "calendar", "seed",
                          "targets", "horizon", "out"})
    synth_flags.option(*synth, key, "generator setting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputFailure;
  }

  if (*synth) {
    SynthConfig config;
    synth_flags.apply(config, *synth);
    cmd_synth(config, std::cout);
    return kOk;
  }

  RunConfig config;
  if (*fit) {
    fit_flags.apply(config, *fit);
    for (const auto& p : fit_runs) config.runs.emplace_back(p);
    cmd_fit(config, std::cout);
  } else if (*est) {
    est_flags.apply(config, *est);
    cmd_estimate(config, std::cout);
  } else {
    diag_flags.apply(config, *diag);
    cmd_diagnose(config, std::cout);
  }
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const FitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStatFailure;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStatFailure;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputFailure;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed artifact: " << e.what() << '\n';
    return kInputFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputFailure;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStatFailure;
  }
}
