#include "ibnr/cli.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "ibnr/csv_io.hpp"
#include "ibnr/synthetic.hpp"

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

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

InclusionProfile profile_from_json(const Json& j) {
  reject_unknown(j, {"edges", "values"}, "validate.profiles[]");
  InclusionProfile p;
  p.edges = j.at("edges").get<std::vector<double>>();
  p.values = j.at("values").get<std::vector<double>>();
  return p;
}

Json profile_to_json(const InclusionProfile& p) { return {{"edges", p.edges}, {"values", p.values}}; }

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

Portfolio load_portfolio(const RunConfig& c, std::optional<std::vector<double>>* column) {
  if (c.claims_path) {
    auto claims = read_csv_file(*c.claims_path);
    const auto policies = read_csv_file(*c.policies_path);
    if (c.inclusion_column && column) *column = take_column(claims, *c.inclusion_column);
    return read_portfolio(claims, policies);
  }
  auto sim = *c.simulation;
  sim.seed = c.seed;
  return simulate(sim, c.threads);
}

std::vector<double> date_grid(const RunConfig& c) {
  if (!c.grid.empty()) return c.grid;
  return {*c.tau};
}

// fixed probabilities of the claims reported by tau, in partition order
std::vector<double> reported_column(const Portfolio& portfolio, const std::vector<double>& column, double tau) {
  const auto ctx = partition(portfolio, tau);
  std::vector<double> out;
  out.reserve(ctx.reported_idx.size());
  for (auto i : ctx.reported_idx) out.push_back(column[i]);
  return out;
}

void require_success(const DateEvaluation& eval) {
  if (eval.failures.empty()) return;
  const auto& f = eval.failures.front();
  throw Error(f.kind, f.estimator + ": " + f.reason);
}

Json failures_json(const std::vector<EstimatorFailure>& failures) {
  Json arr = Json::array();
  for (const auto& f : failures) arr.push_back({{"estimator", f.estimator}, {"kind", to_string(f.kind)}, {"reason", f.reason}});
  return arr;
}

RunOutput run_simulate(const RunConfig& c) {
  auto sim = *c.simulation;
  sim.seed = c.seed;
  const auto portfolio = simulate(sim, c.threads);
  RunOutput out;
  std::ostringstream claims, policies;
  write_claims_csv(claims, portfolio);
  write_policies_csv(policies, portfolio);
  out.files.emplace_back("claims.csv", claims.str());
  out.files.emplace_back("policies.csv", policies.str());
  std::vector<double> grid = c.grid;
  if (grid.empty() && c.tau) grid.push_back(*c.tau);
  out.files.emplace_back("ground_truth.json", ground_truth_json(sim, ground_truth(sim, portfolio, grid, c.threads)));
  return out;
}

RunOutput run_fit(const RunConfig& c) {
  std::optional<std::vector<double>> column;
  const auto portfolio = load_portfolio(c, &column);
  const double tau = *c.tau;
  const std::vector<EstimatorKind> needs{EstimatorKind::ml_wbp, EstimatorKind::ml_wl};
  std::optional<std::vector<double>> fixed;
  if (column) fixed = reported_column(portfolio, *column, tau);
  const auto eval = evaluate_date(portfolio, tau, needs, c.pipeline, nullptr, fixed);
  require_success(eval);
  RunOutput out;
  if (eval.models.hazard) out.files.emplace_back("hazard_model.json", json_text(to_json(*eval.models.hazard)));
  out.files.emplace_back("frequency_model.json", json_text(to_json(*eval.models.frequency)));
  Json sev;
  sev["plain"] = to_json(*eval.models.plain);
  sev["plain+wbp"] = to_json(*eval.models.wbp);
  sev["weighted"] = to_json(*eval.models.weighted);
  if (eval.models.population) sev["population"] = to_json(*eval.models.population);
  out.files.emplace_back("severity_models.json", json_text(sev));
  std::ostringstream laws;
  write_ibnr_law_csv(laws, portfolio, *eval.frequency_data, eval.laws);
  out.files.emplace_back("ibnr_laws.csv", laws.str());
  std::ostringstream pis;
  pis << "claim_id,pi\n";
  const auto ctx = partition(portfolio, tau);
  for (std::size_t k = 0; k < ctx.reported_idx.size(); ++k)
    pis << portfolio.claims()[ctx.reported_idx[k]].claim_id << ',' << format_real((*eval.pis)[k]) << '\n';
  out.files.emplace_back("inclusion_probabilities.csv", pis.str());
  return out;
}

RunOutput run_reserve(const RunConfig& c) {
  std::optional<std::vector<double>> column;
  const auto portfolio = load_portfolio(c, &column);
  const double tau = *c.tau;
  std::optional<std::vector<double>> fixed;
  if (column) fixed = reported_column(portfolio, *column, tau);
  const auto eval = evaluate_date(portfolio, tau, c.estimators, c.pipeline, nullptr, fixed);
  if (!c.estimators.empty() && eval.estimates.empty()) require_success(eval);
  RunOutput out;
  std::ostringstream csv;
  write_estimates_header(csv);
  for (const auto& e : eval.estimates) write_estimate_row(csv, tau, e);
  out.files.emplace_back("estimates.csv", csv.str());
  Json report;
  report["valuation_date"] = tau;
  const auto ctx = partition(portfolio, tau);
  report["reported_claims"] = ctx.reported_idx.size();
  report["estimates"] = Json::array();
  for (const auto& e : eval.estimates) {
    Json j{{"estimator", e.label}, {"point", e.point}, {"model_term", e.model_term},
           {"augmentation_term", e.augmentation_term}, {"min_pi", e.min_pi}, {"max_pi", e.max_pi}, {"clamped", e.clamped}};
    if (e.interval) j["interval"] = {{"lo", e.interval->lo}, {"hi", e.interval->hi}, {"level", e.interval->level}};
    report["estimates"].push_back(std::move(j));
  }
  report["failures"] = failures_json(eval.failures);
  out.files.emplace_back("reserve.json", json_text(report));
  if (eval.pis) {
    std::ostringstream pseudo;
    write_pseudo_population_csv(pseudo, portfolio, fixed_pseudo_population(ctx.reported_idx, *eval.pis));
    out.files.emplace_back("pseudo_population.csv", pseudo.str());
  }
  return out;
}

RunOutput run_backtest(const RunConfig& c) {
  const auto portfolio = load_portfolio(c, nullptr);
  const auto grid = date_grid(c);
  const auto report = backtest(portfolio, grid, c.estimators, c.refit, c.pipeline, true);
  RunOutput out;
  out.files.emplace_back("backtest_report.json", json_text(to_json(report)));
  out.files.emplace_back("backtest_rows.csv", backtest_rows_csv(report));
  out.files.emplace_back("backtest_metrics.csv", backtest_metrics_csv(report));
  out.files.emplace_back("backtest_plot.csv", backtest_plot_csv(report));
  return out;
}

RunOutput run_validate(const RunConfig& c) {
  auto sim = *c.simulation;
  sim.seed = c.seed;
  const auto& v = c.validate;
  Json j;
  j["tau"] = v.tau;
  j["identity"] = Json::array();
  for (const auto& profile : v.profiles) {
    const auto rep = validate_ipw_identity(sim, v.tau, v.identity_replicates, profile, c.threads);
    Json r = to_json(rep);
    r["profile"] = profile_to_json(profile);
    r["within_3_se"] = std::abs(rep.z) <= 3.0;
    j["identity"].push_back(std::move(r));
  }
  RobustnessOptions ro;
  ro.tau = v.tau;
  ro.replicates = v.robustness_replicates;
  ro.distortion = v.distortion;
  ro.severity_bias = v.severity_bias;
  ro.cohort_width = v.cohort_width;
  ro.clamp_floor = c.pipeline.clamp_floor;
  ro.threads = c.threads;
  // the grid needs severity-independent reporting
  auto grid_sim = sim;
  grid_sim.delay.gamma = 0.0;
  const auto cells = double_robustness_grid(grid_sim, ro);
  j["double_robustness"] = {{"gamma", 0.0}, {"cells", to_json(cells)}};
  RunOutput out;
  out.files.emplace_back("validation.json", json_text(j));
  return out;
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "simulate") return Command::simulate;
  if (name == "fit") return Command::fit;
  if (name == "reserve") return Command::reserve;
  if (name == "backtest") return Command::backtest;
  if (name == "validate") return Command::validate;
  throw InvalidArgument("unknown command '" + name + "'");
}

const char* to_string(Command command) noexcept {
  switch (command) {
    case Command::simulate: return "simulate";
    case Command::fit: return "fit";
    case Command::reserve: return "reserve";
    case Command::backtest: return "backtest";
    case Command::validate: return "validate";
  }
  return "unknown";
}

RunConfig run_config_from_json(const Json& j, Command command, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.command = command;
  c.estimators.assign(all_estimators().begin(), all_estimators().end());
  try {
    reject_unknown(j, {"seed", "threads", "output_dir", "simulation", "data", "valuation", "estimators", "model",
                       "bootstrap", "validate"},
                   "config");
    if (j.contains("simulation")) {
      c.simulation = sim_config_from_json(j.at("simulation"));
      c.seed = c.simulation->seed;
    }
    read(j, "seed", c.seed);
    read(j, "threads", c.threads);
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    if (j.contains("data")) {
      const auto& d = j.at("data");
      reject_unknown(d, {"claims", "policies", "inclusion_column"}, "data");
      if (d.contains("claims")) c.claims_path = resolve(base_dir, d.at("claims").get<std::string>());
      if (d.contains("policies")) c.policies_path = resolve(base_dir, d.at("policies").get<std::string>());
      if (d.contains("inclusion_column")) c.inclusion_column = d.at("inclusion_column").get<std::string>();
    }
    if (j.contains("valuation")) {
      const auto& v = j.at("valuation");
      reject_unknown(v, {"tau", "grid"}, "valuation");
      if (v.contains("tau")) c.tau = v.at("tau").get<double>();
      read(v, "grid", c.grid);
    }
    if (j.contains("estimators")) {
      c.estimators.clear();
      for (const auto& name : j.at("estimators")) {
        const auto k = parse_estimator(name.get<std::string>());
        if (std::find(c.estimators.begin(), c.estimators.end(), k) == c.estimators.end()) c.estimators.push_back(k);
      }
    }
    auto& p = c.pipeline;
    if (j.contains("model")) {
      const auto& m = j.at("model");
      reject_unknown(m,
                     {"hazard_bins", "hazard_bin_edges", "severity_effect", "time_effect", "effect_bins",
                      "delay_covariates", "count_family", "count_severity", "max_iterations", "gradient_tolerance",
                      "clamp_floor", "weight_cap_quantile", "balance", "triangle_width", "credibility_z", "refit"},
                     "model");
      read(m, "hazard_bins", p.hazard.bins);
      read(m, "hazard_bin_edges", p.hazard.bin_edges);
      if (m.contains("severity_effect")) p.severity_effect = parse_severity_effect(m.at("severity_effect").get<std::string>());
      if (m.contains("time_effect")) p.time_effect = parse_time_effect(m.at("time_effect").get<std::string>());
      read(m, "effect_bins", p.effect_bins);
      if (m.contains("delay_covariates")) p.delay_covariates = m.at("delay_covariates").get<std::vector<std::size_t>>();
      if (m.contains("count_family")) p.frequency.family = parse_count_family(m.at("count_family").get<std::string>());
      if (m.contains("count_severity")) p.count_severity = parse_count_severity(m.at("count_severity").get<std::string>());
      if (m.contains("max_iterations")) p.hazard.max_iterations = p.frequency.max_iterations = m.at("max_iterations").get<int>();
      if (m.contains("gradient_tolerance"))
        p.hazard.gradient_tolerance = p.frequency.gradient_tolerance = m.at("gradient_tolerance").get<double>();
      read(m, "clamp_floor", p.clamp_floor);
      read(m, "weight_cap_quantile", p.weight_cap_quantile);
      if (m.contains("balance")) p.balance = parse_balance_target(m.at("balance").get<std::string>());
      read(m, "triangle_width", p.triangle_width);
      read(m, "credibility_z", p.credibility_z);
      if (m.contains("refit")) c.refit = parse_refit_policy(m.at("refit").get<std::string>());
    }
    p.bootstrap_seed = c.seed;
    if (j.contains("bootstrap")) {
      const auto& b = j.at("bootstrap");
      reject_unknown(b, {"enabled", "replicates", "level", "seed"}, "bootstrap");
      read(b, "enabled", p.bootstrap);
      read(b, "replicates", p.bootstrap_replicates);
      read(b, "level", p.bootstrap_level);
      read(b, "seed", p.bootstrap_seed);
    }
    if (j.contains("validate")) {
      const auto& v = j.at("validate");
      reject_unknown(v, {"tau", "identity_replicates", "profiles", "robustness_replicates", "distortion",
                         "severity_bias", "cohort_width"},
                     "validate");
      auto& o = c.validate;
      read(v, "tau", o.tau);
      read(v, "identity_replicates", o.identity_replicates);
      if (v.contains("profiles")) {
        o.profiles.clear();
        for (const auto& pj : v.at("profiles")) o.profiles.push_back(profile_from_json(pj));
      }
      read(v, "robustness_replicates", o.robustness_replicates);
      read(v, "distortion", o.distortion);
      read(v, "severity_bias", o.severity_bias);
      read(v, "cohort_width", o.cohort_width);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.pipeline.threads = c.threads;
  return c;
}

void check_run_config(const RunConfig& c) {
  if (c.threads == 0) throw InvalidArgument("threads must be >= 1");
  if (c.claims_path.has_value() != c.policies_path.has_value())
    throw InvalidArgument("data.claims and data.policies must be given together");
  const bool has_data = c.claims_path.has_value();
  if (has_data) {
    for (const auto& path : {*c.claims_path, *c.policies_path})
      if (!std::filesystem::exists(path)) throw IoError("input file not found: " + path.string());
  }
  if (c.inclusion_column && !has_data) throw InvalidArgument("data.inclusion_column requires data.claims");
  switch (c.command) {
    case Command::simulate:
    case Command::validate:
      if (!c.simulation) throw InvalidArgument(std::string(to_string(c.command)) + " requires a simulation section");
      break;
    case Command::fit:
    case Command::reserve:
      if (!has_data && !c.simulation) throw InvalidArgument("no data: give data.claims/policies or a simulation section");
      if (!c.tau) throw InvalidArgument(std::string(to_string(c.command)) + " requires valuation.tau");
      break;
    case Command::backtest:
      if (!has_data && !c.simulation) throw InvalidArgument("no data: give data.claims/policies or a simulation section");
      if (c.grid.empty() && !c.tau) throw InvalidArgument("backtest requires valuation.grid or valuation.tau");
      for (std::size_t i = 1; i < c.grid.size(); ++i)
        if (!(c.grid[i] > c.grid[i - 1])) throw InvalidArgument("valuation.grid must be strictly increasing");
      break;
  }
  if (c.pipeline.bootstrap && c.pipeline.bootstrap_replicates < 100)
    throw InvalidArgument("bootstrap.replicates must be >= 100");
}

Json execution_plan(const RunConfig& c) {
  Json j;
  j["command"] = to_string(c.command);
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output_dir"] = c.output_dir.string();
  if (c.claims_path) {
    j["input"] = {{"claims", c.claims_path->string()}, {"policies", c.policies_path->string()}};
  } else if (c.simulation) {
    auto sim = *c.simulation;
    sim.seed = c.seed;
    j["input"] = {{"simulation", sim_config_to_json(sim)}};
  }
  if (c.tau) j["tau"] = *c.tau;
  if (!c.grid.empty()) j["grid"] = c.grid;
  Json names = Json::array();
  for (auto k : c.estimators) names.push_back(to_string(k));
  Json outputs = Json::array();
  switch (c.command) {
    case Command::simulate:
      outputs = {"claims.csv", "policies.csv", "ground_truth.json"};
      break;
    case Command::fit:
      outputs = {"hazard_model.json", "frequency_model.json", "severity_models.json", "ibnr_laws.csv",
                 "inclusion_probabilities.csv"};
      break;
    case Command::reserve:
      j["estimators"] = names;
      outputs = {"estimates.csv", "reserve.json", "pseudo_population.csv"};
      break;
    case Command::backtest:
      j["estimators"] = names;
      j["refit"] = to_string(c.refit);
      outputs = {"backtest_report.json", "backtest_rows.csv", "backtest_metrics.csv", "backtest_plot.csv"};
      break;
    case Command::validate:
      j["identity_profiles"] = c.validate.profiles.size();
      j["identity_replicates"] = c.validate.identity_replicates;
      j["robustness_replicates"] = c.validate.robustness_replicates;
      outputs = {"validation.json"};
      break;
  }
  j["outputs"] = outputs;
  return j;
}

RunOutput execute(const RunConfig& config) {
  check_run_config(config);
  switch (config.command) {
    case Command::simulate: return run_simulate(config);
    case Command::fit: return run_fit(config);
    case Command::reserve: return run_reserve(config);
    case Command::backtest: return run_backtest(config);
    case Command::validate: return run_validate(config);
  }
  throw InvalidArgument("unknown command");
}

void write_outputs(const std::filesystem::path& dir, const RunOutput& output) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  for (const auto& [name, text] : output.files) write_text_file(dir / name, text);
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return 3;
    case ErrorKind::schema_mismatch: return 4;
    case ErrorKind::unknown_estimator: return 5;
    case ErrorKind::convergence_failure: return 6;
    case ErrorKind::estimator_undefined: return 7;
    case ErrorKind::undefined_cohort: return 8;
    case ErrorKind::degenerate_fit: return 9;
    case ErrorKind::singular_design: return 10;
    case ErrorKind::undefined_distribution: return 11;
    case ErrorKind::io_error: return 12;
  }
  return 1;
}

std::string error_json(ErrorKind kind, const std::string& message) {
  Json j;
  j["error"] = to_string(kind);
  j["message"] = message;
  j["exit_code"] = exit_code(kind);
  return j.dump();
}

}  // namespace ibnr
