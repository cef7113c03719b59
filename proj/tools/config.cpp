#include "config.hpp"

#include "extremes/error.hpp"
#include "extremes/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>

namespace extremes::cli {

namespace {

std::string normalise_key(std::string_view key) {
  std::string k(key);
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep = ',') {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    auto part = trim(s.substr(start, pos - start));
    if (!part.empty()) parts.push_back(part);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T number(std::string_view key, std::string_view value) {
  value = trim(value);
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw InputError("setting '" + std::string(key) + "': not a number: '" + std::string(value) + "'");
  return out;
}

bool boolean(std::string_view key, std::string_view value) {
  value = trim(value);
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw InputError("setting '" + std::string(key) + "': expected a boolean");
}

MonthArray month_values(std::string_view key, std::string_view value) {
  const auto parts = split(value);
  MonthArray out{};
  if (parts.size() == 1) {
    out.fill(number<double>(key, parts[0]));
  } else if (parts.size() == 12) {
    for (int m = 0; m < 12; ++m) out[m] = number<double>(key, parts[m]);
  } else {
    throw InputError("setting '" + std::string(key) + "': expected 1 or 12 values");
  }
  return out;
}

} // namespace

Calendar parse_calendar(std::string_view text) {
  text = trim(text);
  if (text == "noleap" || text == "365_day" || text == "no_leap") return Calendar::noleap();
  const auto parts = split(text);
  if (parts.size() != 12) throw InputError("calendar: expected 'noleap' or 12 month lengths");
  Calendar::MonthLengths lengths{};
  for (int m = 0; m < 12; ++m) lengths[m] = number<int>("calendar", parts[m]);
  try {
    return Calendar::from_month_lengths(lengths);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("calendar: ") + e.what());
  }
}

void apply_setting(RunConfig& c, std::string_view raw_key, std::string_view value) {
  const std::string key = normalise_key(raw_key);
  value = trim(value);
  if (key == "runs") {
    c.runs.clear();
    for (auto p : split(value)) c.runs.emplace_back(std::string(p));
  } else if (key == "calendar") {
    c.calendar = parse_calendar(value);
  } else if (key == "header") {
    c.header = boolean(key, value);
  } else if (key == "question") {
    try {
      c.question = parse_question(value);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  } else if (key == "tau") {
    c.fit.threshold.tau = number<double>(key, value);
  } else if (key == "run_length") {
    c.fit.run_length = number<int>(key, value);
  } else if (key == "q_prob") {
    c.fit.cev.q_prob = number<double>(key, value);
  } else if (key == "shape_mode") {
    if (value == "auto" || value.empty()) {
      c.fit.shape_override.reset();
    } else {
      try {
        c.fit.shape_override = parse_shape_mode(value);
      } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
      }
    }
  } else if (key == "bulk") {
    if (value == "pooled") c.fit.bulk_mode = BulkMode::pooled;
    else if (value == "by_month") c.fit.bulk_mode = BulkMode::by_month;
    else throw InputError("bulk must be 'pooled' or 'by_month'");
  } else if (key == "order_k") {
    c.fit.order_override = number<int>(key, value);
  } else if (key == "n_sim") {
    c.sim.n_sim = number<int>(key, value);
  } else if (key == "n_srun") {
    c.sim.n_srun = number<int>(key, value);
  } else if (key == "seed") {
    c.sim.seed = number<std::uint64_t>(key, value);
  } else if (key == "alpha") {
    c.sim.alpha = number<double>(key, value);
  } else if (key == "rate_mode") {
    c.sim.rate_mode = boolean(key, value);
  } else if (key == "correction") {
    if (value == "power") c.sim.correction = Correction::power;
    else if (value == "multiplicative") c.sim.correction = Correction::multiplicative;
    else throw InputError("correction must be 'power' or 'multiplicative'");
  } else if (key == "sampler") {
    if (value == "per_day") c.sim.sampler = MarginalSampler::per_day;
    else if (value == "aggregated") c.sim.sampler = MarginalSampler::aggregated;
    else throw InputError("sampler must be 'per_day' or 'aggregated'");
  } else if (key == "target") {
    c.sim.target_level = number<double>(key, value);
  } else if (key == "sim_days") {
    c.sim.sim_days = number<std::size_t>(key, value);
  } else if (key == "chain_steps") {
    c.sim.chain_steps = number<int>(key, value);
  } else if (key == "threads") {
    c.sim.threads = number<int>(key, value);
  } else if (key == "out") {
    c.out = std::string(value);
  } else if (key == "emulators") {
    c.emulators = std::string(value);
  } else if (key == "dump_samples") {
    c.dump_samples = boolean(key, value);
  } else if (key == "envelope_replicates") {
    c.envelope_replicates = number<int>(key, value);
  } else {
    throw InputError("unknown setting '" + std::string(raw_key) + "'");
  }
}

void apply_setting(SynthConfig& c, std::string_view raw_key, std::string_view value) {
  const std::string key = normalise_key(raw_key);
  value = trim(value);
  auto& s = c.spec;
  if (key == "runs") s.n_runs = number<int>(key, value);
  else if (key == "days") s.n_days = number<std::size_t>(key, value);
  else if (key == "sites") s.n_sites = number<std::size_t>(key, value);
  else if (key == "order_k") s.order_k = number<int>(key, value);
  else if (key == "exceed_prob") s.exceed_prob = number<double>(key, value);
  else if (key == "threshold") s.threshold = month_values(key, value);
  else if (key == "sigma") s.sigma = month_values(key, value);
  else if (key == "xi") s.xi = month_values(key, value);
  else if (key == "mean_cluster_size") s.mean_cluster_size = number<double>(key, value);
  else if (key == "min_gap") s.min_gap = number<int>(key, value);
  else if (key == "bulk_floor") s.bulk_floor = number<double>(key, value);
  else if (key == "calendar") s.calendar = parse_calendar(value);
  else if (key == "seed") s.seed = number<std::uint64_t>(key, value);
  else if (key == "targets") {
    c.targets.clear();
    for (auto p : split(value)) c.targets.push_back(number<double>(key, p));
  } else if (key == "horizon") c.horizon = number<std::size_t>(key, value);
  else if (key == "out") c.out = std::string(value);
  else throw InputError("unknown synth setting '" + std::string(raw_key) + "'");
}

std::vector<std::pair<std::string, std::string>> read_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string_view text = line;
    if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError(n, "expected 'key = value'", path.string());
    out.emplace_back(std::string(trim(text.substr(0, eq))), std::string(trim(text.substr(eq + 1))));
  }
  return out;
}

void validate(const RunConfig& c, bool need_runs) {
  if (need_runs) {
    if (c.runs.empty()) throw InputError("no run files given (--runs)");
    for (const auto& p : c.runs)
      if (!std::filesystem::exists(p)) throw InputError("run file not found: " + p.string());
  }
  const auto& f = c.fit;
  if (!(f.threshold.tau > 0.0 && f.threshold.tau < 1.0)) throw InputError("tau must lie in (0, 1)");
  if (f.run_length < 1) throw InputError("run length must be >= 1");
  if (!(f.cev.q_prob > 0.0 && f.cev.q_prob < 1.0)) throw InputError("q-prob must lie in (0, 1)");
  const auto& s = c.sim;
  if (s.n_sim < 1 || s.n_srun < 1) throw InputError("n-sim and n-srun must be >= 1");
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (s.threads < 0) throw InputError("threads must be >= 0");
  if (s.chain_steps < 1) throw InputError("chain steps must be >= 1");
  if (c.envelope_replicates < 2) throw InputError("envelope replicates must be >= 2");
}

} // namespace extremes::cli
