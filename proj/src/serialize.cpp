#include "extremes/serialize.hpp"

#include "extremes/error.hpp"

#include <fstream>
#include <stdexcept>

namespace extremes {

namespace {

template <typename T, std::size_t N>
std::array<T, N> to_array(const Json& j) {
  if (!j.is_array() || j.size() != N)
    throw InputError("expected an array of " + std::to_string(N) + " values");
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = j[i].get<T>();
  return out;
}

Json at(const Json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing JSON field '") + key + "'");
  return j.at(key);
}

} // namespace

std::string_view shape_mode_name(ShapeMode m) {
  return m == ShapeMode::constant ? "constant" : "by_month";
}

ShapeMode parse_shape_mode(std::string_view s) {
  if (s == "constant") return ShapeMode::constant;
  if (s == "by_month") return ShapeMode::by_month;
  throw std::invalid_argument("shape mode must be 'constant' or 'by_month'");
}

Json to_json(const ThresholdModel& m) {
  return Json{{"tau", m.tau},
              {"u_by_month", m.u_by_month},
              {"log_zeta_by_month", m.log_zeta_by_month},
              {"loglik", m.loglik}};
}

ThresholdModel threshold_from_json(const Json& j) {
  ThresholdModel m;
  m.tau = at(j, "tau").get<double>();
  m.u_by_month = to_array<double, 12>(at(j, "u_by_month"));
  m.log_zeta_by_month = to_array<double, 12>(at(j, "log_zeta_by_month"));
  m.loglik = at(j, "loglik").get<double>();
  return m;
}

Json to_json(const GPModel& m) {
  return Json{{"log_sigma_by_month", m.log_sigma_by_month},
              {"shape_mode", shape_mode_name(m.shape_mode)},
              {"xi", m.xi},
              {"loglik", m.loglik}};
}

GPModel gp_from_json(const Json& j, const ThresholdModel& thresholds) {
  GPModel m;
  m.log_sigma_by_month = to_array<double, 12>(at(j, "log_sigma_by_month"));
  m.shape_mode = parse_shape_mode(at(j, "shape_mode").get<std::string>());
  m.xi = at(j, "xi").get<std::vector<double>>();
  const std::size_t want = m.shape_mode == ShapeMode::constant ? 1 : 12;
  if (m.xi.size() != want) throw InputError("GP model: wrong number of shape values");
  m.loglik = at(j, "loglik").get<double>();
  m.thresholds = thresholds;
  return m;
}

Json to_json(const ClusterSet& cs) {
  Json clusters = Json::array();
  for (const auto& c : cs.clusters) clusters.push_back(Json{{"days", c.days}, {"values", c.values}});
  return Json{{"run_id", cs.run_id},
              {"run_length", cs.run_length},
              {"n_days", cs.n_days},
              {"n_exceedances", cs.n_exceedances},
              {"n_clusters", cs.n_clusters()},
              {"theta_hat", cs.theta_hat ? Json(*cs.theta_hat) : Json(nullptr)},
              {"pi_star_hat", cs.pi_star_hat},
              {"maxima", cs.maxima},
              {"maxima_days", cs.maxima_days},
              {"maxima_months", cs.maxima_months},
              {"clusters", clusters}};
}

ClusterSet clusters_from_json(const Json& j) {
  ClusterSet cs;
  cs.run_id = at(j, "run_id").get<int>();
  cs.run_length = at(j, "run_length").get<int>();
  cs.n_days = at(j, "n_days").get<std::size_t>();
  cs.n_exceedances = at(j, "n_exceedances").get<std::size_t>();
  const Json theta = at(j, "theta_hat");
  if (!theta.is_null()) cs.theta_hat = theta.get<double>();
  cs.pi_star_hat = at(j, "pi_star_hat").get<double>();
  cs.maxima = at(j, "maxima").get<std::vector<double>>();
  cs.maxima_days = at(j, "maxima_days").get<std::vector<std::size_t>>();
  cs.maxima_months = at(j, "maxima_months").get<std::vector<int>>();
  for (const auto& c : at(j, "clusters"))
    cs.clusters.push_back({at(c, "days").get<std::vector<std::size_t>>(),
                           at(c, "values").get<std::vector<double>>()});
  if (cs.maxima.size() != cs.clusters.size() || cs.maxima_months.size() != cs.clusters.size())
    throw InputError("cluster set: inconsistent cluster and maxima counts");
  return cs;
}

Json to_json(const CEVModel& m) {
  return Json{{"beta0", m.beta0},
              {"beta1", m.beta1},
              {"q_threshold", m.q_threshold},
              {"q_prob", m.q_prob},
              {"kde_bandwidth", m.kde_bandwidth},
              {"nuisance_mu", m.nuisance_mu},
              {"nuisance_sigma", m.nuisance_sigma},
              {"negloglik", m.negloglik},
              {"residuals", m.residuals}};
}

CEVModel cev_from_json(const Json& j) {
  CEVModel m;
  m.beta0 = at(j, "beta0").get<double>();
  m.beta1 = at(j, "beta1").get<double>();
  m.q_threshold = at(j, "q_threshold").get<double>();
  m.q_prob = at(j, "q_prob").get<double>();
  m.kde_bandwidth = at(j, "kde_bandwidth").get<double>();
  m.nuisance_mu = at(j, "nuisance_mu").get<double>();
  m.nuisance_sigma = at(j, "nuisance_sigma").get<double>();
  m.negloglik = at(j, "negloglik").get<double>();
  m.residuals = at(j, "residuals").get<std::vector<double>>();
  return m;
}

Json to_json(const RunEmulator& e) {
  Json j{{"run_id", e.run_id},
         {"question", question_name(e.question)},
         {"order_k", e.order_k},
         {"month_lengths", e.calendar.month_lengths()},
         {"bulk_mode", e.mixed.bulk_mode() == BulkMode::pooled ? "pooled" : "by_month"},
         {"pi", e.mixed.pi()},
         {"threshold", to_json(e.threshold_model())},
         {"gp", to_json(e.gp_model())},
         {"clusters", to_json(e.clusters)},
         {"cev", e.cev ? to_json(*e.cev) : Json(nullptr)},
         {"series", e.series}};
  return j;
}

RunEmulator emulator_from_json(const Json& j) {
  const auto calendar = Calendar::from_month_lengths(to_array<int, 12>(at(j, "month_lengths")));
  const ThresholdModel thr = threshold_from_json(at(j, "threshold"));
  GPModel gp = gp_from_json(at(j, "gp"), thr);
  auto series = at(j, "series").get<std::vector<double>>();
  const auto months = calendar.fold(series.size());
  const std::string bulk = at(j, "bulk_mode").get<std::string>();
  if (bulk != "pooled" && bulk != "by_month") throw InputError("unknown bulk mode '" + bulk + "'");
  MixedDistribution md(series, months, at(j, "pi").get<double>(), std::move(gp),
                       bulk == "pooled" ? BulkMode::pooled : BulkMode::by_month);
  std::optional<CEVModel> cev;
  if (!at(j, "cev").is_null()) cev = cev_from_json(j.at("cev"));
  return RunEmulator{at(j, "run_id").get<int>(),
                     parse_question(at(j, "question").get<std::string>()),
                     at(j, "order_k").get<int>(),
                     calendar,
                     std::move(series),
                     clusters_from_json(at(j, "clusters")),
                     std::move(md),
                     std::move(cev)};
}

Json to_json(const EstimateResult& r, const EstimateMeta& meta) {
  return Json{{"question", question_name(meta.question)},
              {"target", meta.target},
              {"point", r.point},
              {"ci_low", r.ci_low},
              {"ci_high", r.ci_high},
              {"alpha", meta.alpha},
              {"n_sim", meta.n_sim},
              {"n_srun", meta.n_srun},
              {"seed", meta.seed},
              {"theta_hat", r.theta_hat},
              {"pi_hat", r.pi_hat},
              {"c_samples_path", meta.c_samples_path.empty() ? Json(nullptr) : Json(meta.c_samples_path)}};
}

Json to_json(const SynthTruth& t) {
  return Json{{"level", t.level},
              {"day_prob_by_month", t.day_prob_by_month},
              {"mean_day_prob", t.mean_day_prob},
              {"horizon_days", t.horizon},
              {"expected_event_days", t.expected_event_days},
              {"expected_persistent_clusters", t.expected_persistent_clusters},
              {"theta", t.theta}};
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw InputError("write failed: " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

} // namespace extremes
