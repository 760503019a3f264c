#include "tbq/serialize.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace tbq {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXcd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix_from_json: expected array");
  Eigen::Index rows = Eigen::Index(j.size()), cols = Eigen::Index(j[0].size());
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = Complex(j[r][c][0].get<double>(), j[r][c][1].get<double>());
  return m;
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

constexpr Eigen::Index kMaxDenseEntries = 1 << 22;

}  // namespace

json design_to_json(const HLDesign& d) {
  json j;
  j["type"] = d.per_sample ? "hl-per-sample" : "hl";
  j["horizon"] = d.n;
  j["quantizers"] = d.quantizer_count;
  j["support"] = d.adc.support;
  j["levels"] = d.adc.levels;
  j["eta"] = d.adc.eta;
  j["zeta"] = d.zeta;
  j["predicted_mse"] = d.predicted_mse;
  j["lambda_sq"] = vector_to_json(d.lambda_sq);
  j["rank_warning"] = d.rank_warning;
  if (d.per_sample) {
    // A = combiner (x) I_horizon, B likewise; the per-sample factors are stored.
    j["combiner"] = matrix_to_json(d.combiner_ps);
    j["digital"] = matrix_to_json(d.digital_ps);
  } else {
    Eigen::Index entries =
        Eigen::Index(d.quantizer_count) * d.n * Eigen::Index(d.vh_sinv.rows());
    if (entries > kMaxDenseEntries)
      throw std::invalid_argument("design_to_json: dense combiner too large; reduce the horizon");
    j["combiner"] = matrix_to_json(d.dense_combiner());
    j["digital"] = matrix_to_json(d.dense_digital());
  }
  return j;
}

json design_to_json(const SpatialDesign& d) {
  json j;
  j["type"] = "spatial";
  j["antennas"] = d.antennas;
  j["rf_chains"] = d.rf_chains;
  j["support"] = d.adc.support;
  j["levels"] = d.adc.levels;
  j["eta"] = d.adc.eta;
  j["predicted_mse"] = d.predicted_mse;
  j["sigma_sq"] = d.sigma_sq;
  j["gains"] = vector_to_json(d.gains);
  j["combiner"] = matrix_to_json(d.combiner);
  Eigen::Index entries = Eigen::Index(d.antennas) * d.synth_right.cols() *
                         Eigen::Index(d.rf_chains) * d.synth_right.rows();
  if (entries <= kMaxDenseEntries) j["digital"] = matrix_to_json(d.dense_digital());
  return j;
}

namespace {

template <typename T>
void take(const json& j, std::set<std::string>& seen, const char* key, T& out) {
  if (j.contains(key)) {
    seen.insert(key);
    out = j.at(key).get<T>();
  }
}

CorrelationModel correlation_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  std::set<std::string> known{"kind"};
  if (kind == "uncorrelated") {
    // no extra keys
  } else if (kind == "jakes") {
    known.insert("spacing");
    if (!j.contains("spacing"))
      throw std::invalid_argument("config: correlation.spacing required for jakes");
  } else if (kind == "explicit") {
    known.insert("sequence");
    if (!j.contains("sequence"))
      throw std::invalid_argument("config: correlation.sequence required for explicit");
  } else {
    throw std::invalid_argument("config: unknown correlation.kind '" + kind + "'");
  }
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw std::invalid_argument("config: unknown key correlation." + it.key());
  if (kind == "jakes") return CorrelationModel::jakes(j.at("spacing").get<double>());
  if (kind == "explicit")
    return CorrelationModel::explicit_sequence(j.at("sequence").get<std::vector<double>>());
  return CorrelationModel::uncorrelated();
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  take(j, seen, "cells", cfg.scenario.cells);
  take(j, seen, "users", cfg.scenario.users);
  take(j, seen, "pilots", cfg.scenario.pilots);
  take(j, seen, "noise_power", cfg.scenario.noise_power);
  take(j, seen, "cell_radius_m", cfg.scenario.cell_radius);
  take(j, seen, "exclusion_radius_m", cfg.scenario.exclusion_radius);
  take(j, seen, "shadow_std_db", cfg.scenario.shadow_std_db);
  take(j, seen, "pathloss_exponent", cfg.scenario.pathloss_exponent);
  take(j, seen, "antennas", cfg.scenario.antennas);
  if (j.contains("correlation")) {
    seen.insert("correlation");
    cfg.scenario.correlation = correlation_from_json(j.at("correlation"));
  }
  if (j.contains("axis")) {
    seen.insert("axis");
    cfg.axis = axis_from_name(j.at("axis").get<std::string>());
  }
  take(j, seen, "grid", cfg.grid);
  take(j, seen, "network_draws", cfg.network_draws);
  take(j, seen, "mc_trials", cfg.mc_trials);
  take(j, seen, "csi_realizations", cfg.csi_realizations);
  take(j, seen, "seed", cfg.seed);
  if (j.contains("estimators")) {
    seen.insert("estimators");
    for (const auto& name : j.at("estimators").get<std::vector<std::string>>())
      cfg.estimators.push_back(estimator_from_name(name));
  }
  take(j, seen, "rate", cfg.rate);
  take(j, seen, "ratio", cfg.ratio);
  take(j, seen, "eta", cfg.eta);
  take(j, seen, "threads", cfg.threads);
  take(j, seen, "dither", cfg.dither);
  take(j, seen, "out", cfg.out);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!seen.count(it.key()))
      throw std::invalid_argument("config: unknown key '" + it.key() + "'");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_config: cannot open " + path);
  json j = json::parse(in);
  return config_from_json(j);
}

}  // namespace tbq
