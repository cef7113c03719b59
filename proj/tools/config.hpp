#pragma once

#include "extremes/ensemble.hpp"
#include "extremes/synth.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace extremes::cli {

/// Settings shared by fit, estimate and diagnose. Populated from a flat
/// `key = value` file, then from command-line flags (flags win).
struct RunConfig {
  std::vector<std::filesystem::path> runs;
  Calendar calendar = Calendar::noleap();
  bool header = false;
  Question question = Question::q1;
  FitConfig fit;
  SimulationConfig sim;
  std::filesystem::path out = ".";
  std::filesystem::path emulators;  // empty: same as out
  bool dump_samples = false;
  int envelope_replicates = 200;
};

struct SynthConfig {
  SynthSpec spec;
  std::vector<double> targets;
  std::size_t horizon = 0;
  std::filesystem::path out = ".";
};

/// Applies one setting; keys use '-' or '_' interchangeably. Throws
/// InputError for unknown keys or malformed values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);
void apply_setting(SynthConfig& config, std::string_view key, std::string_view value);

/// Reads `key = value` lines; blank lines and '#' comments are skipped.
std::vector<std::pair<std::string, std::string>> read_settings(const std::filesystem::path& path);

/// Every run file exists and numeric settings lie in their ranges.
void validate(const RunConfig& config, bool need_runs);

Calendar parse_calendar(std::string_view text);

} // namespace extremes::cli
