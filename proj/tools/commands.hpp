#pragma once

#include "config.hpp"

#include <iosfwd>

namespace extremes::cli {

/// Fits one emulator per run file and writes its JSON artifacts to `out`.
void cmd_fit(const RunConfig& config, std::ostream& log);

/// Runs the Monte Carlo estimate over the emulators found in the emulator
/// directory and writes estimate_<question>.json.
void cmd_estimate(const RunConfig& config, std::ostream& log);

/// Writes run_<r>.csv files and truth.json.
void cmd_synth(const SynthConfig& config, std::ostream& log);

/// Writes QQ, threshold and (for persistence questions) CEV CSV bundles.
void cmd_diagnose(const RunConfig& config, std::ostream& log);

/// Emulator files in `dir`, ordered by run id.
std::vector<RunEmulator> load_emulators(const std::filesystem::path& dir);

} // namespace extremes::cli
