#include "ibnr/config.hpp"

#include <set>

namespace ibnr {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw InvalidArgument("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

SimConfig sim_config_from_json(const Json& j, SimConfig c) {
  try {
    reject_unknown(j, {"n_policies", "horizon", "contract_length", "covariates", "frequency", "severity", "delay", "seed"},
                   "simulation");
    read(j, "n_policies", c.n_policies);
    read(j, "horizon", c.horizon);
    read(j, "contract_length", c.contract_length);
    read(j, "seed", c.seed);
    if (j.contains("covariates")) {
      const auto& s = j.at("covariates");
      reject_unknown(s, {"dimension", "low", "high", "exposure_low", "exposure_high"}, "simulation.covariates");
      read(s, "dimension", c.covariates.dimension);
      read(s, "low", c.covariates.low);
      read(s, "high", c.covariates.high);
      read(s, "exposure_low", c.covariates.exposure_low);
      read(s, "exposure_high", c.covariates.exposure_high);
    }
    if (j.contains("frequency")) {
      const auto& s = j.at("frequency");
      reject_unknown(s, {"family", "zero_coef", "mean_coef", "dispersion"}, "simulation.frequency");
      if (s.contains("family")) c.frequency.family = parse_count_family(s.at("family").get<std::string>());
      read(s, "zero_coef", c.frequency.zero_coef);
      read(s, "mean_coef", c.frequency.mean_coef);
      read(s, "dispersion", c.frequency.dispersion);
    }
    if (j.contains("severity")) {
      const auto& s = j.at("severity");
      reject_unknown(s, {"beta", "sigma"}, "simulation.severity");
      read(s, "beta", c.severity.beta);
      read(s, "sigma", c.severity.sigma);
    }
    if (j.contains("delay")) {
      const auto& s = j.at("delay");
      reject_unknown(s, {"bin_edges", "rates", "coef", "gamma"}, "simulation.delay");
      read(s, "bin_edges", c.delay.bin_edges);
      read(s, "rates", c.delay.rates);
      read(s, "coef", c.delay.coef);
      read(s, "gamma", c.delay.gamma);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("simulation config: ") + e.what());
  }
  c.validate();
  return c;
}

Json sim_config_to_json(const SimConfig& c) {
  Json j;
  j["n_policies"] = c.n_policies;
  j["horizon"] = c.horizon;
  j["contract_length"] = c.contract_length;
  j["seed"] = c.seed;
  j["covariates"] = {{"dimension", c.covariates.dimension},
                     {"low", c.covariates.low},
                     {"high", c.covariates.high},
                     {"exposure_low", c.covariates.exposure_low},
                     {"exposure_high", c.covariates.exposure_high}};
  j["frequency"] = {{"family", to_string(c.frequency.family)},
                    {"zero_coef", c.frequency.zero_coef},
                    {"mean_coef", c.frequency.mean_coef},
                    {"dispersion", c.frequency.dispersion}};
  j["severity"] = {{"beta", c.severity.beta}, {"sigma", c.severity.sigma}};
  j["delay"] = {{"bin_edges", c.delay.bin_edges},
                {"rates", c.delay.rates},
                {"coef", c.delay.coef},
                {"gamma", c.delay.gamma}};
  return j;
}

Json to_json(const FitDiagnostics& d) {
  Json j;
  j["converged"] = d.converged;
  j["iterations"] = d.iterations;
  j["gradient_norm"] = d.gradient_norm;
  j["log_likelihood"] = d.log_likelihood;
  j["ridge_applied"] = d.ridge_applied;
  j["warnings"] = d.warnings;
  return j;
}

Json to_json(const HazardModel& m) {
  Json j;
  j["bin_edges"] = m.bin_edges;
  j["log_baseline"] = m.log_baseline;
  j["beta"] = m.beta;
  j["features"] = {{"covariate_columns", m.spec.covariate_columns},
                   {"severity_effect", to_string(m.spec.severity_effect)},
                   {"severity_cuts", m.spec.severity_cuts},
                   {"time_effect", to_string(m.spec.time_effect)},
                   {"time_cuts", m.spec.time_cuts}};
  j["severity_plugin"] = m.severity_plugin;
  j["standard_errors"] = m.standard_errors;
  j["diagnostics"] = to_json(m.diagnostics);
  return j;
}

HazardModel hazard_model_from_json(const Json& j) {
  try {
    HazardModel m;
    m.bin_edges = j.at("bin_edges").get<std::vector<double>>();
    m.log_baseline = j.at("log_baseline").get<std::vector<double>>();
    m.beta = j.at("beta").get<std::vector<double>>();
    const auto& f = j.at("features");
    m.spec.covariate_columns = f.at("covariate_columns").get<std::vector<std::size_t>>();
    m.spec.severity_effect = parse_severity_effect(f.at("severity_effect").get<std::string>());
    m.spec.severity_cuts = f.at("severity_cuts").get<std::vector<double>>();
    m.spec.time_effect = parse_time_effect(f.at("time_effect").get<std::string>());
    m.spec.time_cuts = f.at("time_cuts").get<std::vector<double>>();
    m.severity_plugin = j.at("severity_plugin").get<double>();
    check_bin_edges(m.bin_edges);
    if (m.log_baseline.size() != m.bin_edges.size() || m.beta.size() != m.spec.dimension())
      throw InvalidArgument("hazard model JSON: inconsistent lengths");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("hazard model JSON: ") + e.what());
  }
}

Json to_json(const ZinbModel& m) {
  Json j;
  j["family"] = to_string(m.family);
  j["beta_zero"] = m.beta_zero;
  j["beta_mean"] = m.beta_mean;
  if (m.family == CountFamily::zinb) j["dispersion"] = m.dispersion;
  j["zero_boundary"] = m.zero_boundary;
  j["standard_errors"] = m.standard_errors;
  j["diagnostics"] = to_json(m.diagnostics);
  return j;
}

Json to_json(const SeverityModel& m) {
  Json j;
  j["mode"] = to_string(m.mode);
  j["beta"] = m.beta;
  j["sigma"] = m.sigma;
  j["wbp_b"] = m.wbp_b;
  j["diagnostics"] = to_json(m.diagnostics);
  return j;
}

}  // namespace ibnr
