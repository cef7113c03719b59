#pragma once

#include "extremes/cev.hpp"
#include "extremes/decluster.hpp"
#include "extremes/ensemble.hpp"
#include "extremes/gpd.hpp"
#include "extremes/synth.hpp"
#include "extremes/threshold.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace extremes {

using Json = nlohmann::ordered_json;

Json to_json(const ThresholdModel& m);
ThresholdModel threshold_from_json(const Json& j);

Json to_json(const GPModel& m);  // thresholds are stored separately
GPModel gp_from_json(const Json& j, const ThresholdModel& thresholds);

Json to_json(const ClusterSet& cs);
ClusterSet clusters_from_json(const Json& j);

Json to_json(const CEVModel& m);
CEVModel cev_from_json(const Json& j);

Json to_json(const RunEmulator& e);
RunEmulator emulator_from_json(const Json& j);

struct EstimateMeta {
  Question question = Question::q1;
  int n_sim = 0;
  int n_srun = 0;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  double target = 0.0;
  std::string c_samples_path;
};

Json to_json(const EstimateResult& r, const EstimateMeta& meta);

Json to_json(const SynthTruth& t);

std::string_view shape_mode_name(ShapeMode m);
ShapeMode parse_shape_mode(std::string_view s);

/// Writes `j` with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

} // namespace extremes
