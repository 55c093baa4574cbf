#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ibnr/claims.hpp"
#include "ibnr/config.hpp"
#include "ibnr/estimators.hpp"
#include "ibnr/hazard.hpp"
#include "ibnr/severity.hpp"
#include "ibnr/simulator.hpp"
#include "ibnr/zinb.hpp"

namespace ibnr {

struct Metrics {
  std::size_t n = 0;
  double me = 0.0;  // mean(truth - estimate)
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> mape;  // mean |truth - estimate| / |truth| over truth != 0
  std::size_t mape_n = 0;
};

Metrics metrics(std::span<const double> truth, std::span<const double> estimates);

/// How the severity term of the delay model enters the policy-level
/// probabilities p_j: held at the median reported severity, or averaged over
/// an inverse-probability-weighted lognormal fit.
enum class CountSeverity { median, integrated };

CountSeverity parse_count_severity(const std::string& name);
const char* to_string(CountSeverity mode) noexcept;

/// Options for fitting all models at one valuation date.
struct PipelineOptions {
  HazardFitOptions hazard;
  SeverityEffect severity_effect = SeverityEffect::linear_log;
  TimeEffect time_effect = TimeEffect::none;
  std::size_t effect_bins = 4;
  std::optional<std::vector<std::size_t>> delay_covariates;  // default: every covariate
  CountSeverity count_severity = CountSeverity::median;
  ZinbFitOptions frequency;
  double clamp_floor = default_clamp_floor;
  double weight_cap_quantile = 0.995;
  BalanceTarget balance = BalanceTarget::odds;
  double triangle_width = 1.0;
  double triangle_origin = 0.0;
  double credibility_z = 0.5;
  bool bootstrap = false;
  std::size_t bootstrap_replicates = 1000;
  double bootstrap_level = 0.9;
  std::uint64_t bootstrap_seed = 1;
  unsigned threads = 1;
};

/// Models fitted on the claims reported by a valuation date.
struct FittedModels {
  double tau = 0.0;
  std::optional<HazardModel> hazard;
  std::optional<ZinbModel> frequency;
  std::optional<SeverityModel> plain;
  std::optional<SeverityModel> wbp;
  std::optional<SeverityModel> weighted;
  std::optional<SeverityModel> population;  // severity law behind integrated p_j
  std::size_t capped_weights = 0;
};

struct EstimatorFailure {
  std::string estimator;
  std::string reason;
  ErrorKind kind = ErrorKind::estimator_undefined;
};

struct DateEvaluation {
  double tau = 0.0;
  std::optional<double> truth;
  std::vector<ReserveEstimate> estimates;
  std::vector<EstimatorFailure> failures;
  FittedModels models;
  std::optional<InclusionProbabilities> pis;  // reported claims, when computed
  std::optional<FrequencyData> frequency_data;
  std::vector<IbnrCountLaw> laws;
};

/// Fits the models needed by `estimators` at tau and evaluates them. When
/// `reuse` is given its models are used instead of refitting. `fixed_pis`
/// replaces the hazard probabilities of the reported claims (aligned with
/// partition(portfolio, tau).reported_idx). Failures are recorded, not thrown.
DateEvaluation evaluate_date(const Portfolio& portfolio, double tau, std::span<const EstimatorKind> estimators,
                             const PipelineOptions& options, const FittedModels* reuse = nullptr,
                             const std::optional<std::vector<double>>& fixed_pis = std::nullopt);

enum class RefitPolicy { every_date, once };

RefitPolicy parse_refit_policy(const std::string& name);
const char* to_string(RefitPolicy policy) noexcept;

struct BacktestRow {
  double tau = 0.0;
  std::optional<double> truth;
  std::vector<ReserveEstimate> estimates;
  std::vector<EstimatorFailure> failures;
};

struct EstimatorSummary {
  std::string estimator;
  Metrics metrics;
};

struct BacktestReport {
  std::vector<std::string> estimators;
  std::vector<BacktestRow> rows;
  std::vector<EstimatorSummary> summary;
  std::vector<std::pair<std::string, std::string>> best;  // metric -> estimator
};

/// Truth is the realized IBNR liability of the portfolio when `truth_known`.
BacktestReport backtest(const Portfolio& portfolio, std::span<const double> grid,
                        std::span<const EstimatorKind> estimators, RefitPolicy refit, const PipelineOptions& options,
                        bool truth_known = true);

/// Summary metrics and best-per-metric recomputed from the rows.
void summarize(BacktestReport& report);

Json to_json(const BacktestReport& report);
std::string backtest_rows_csv(const BacktestReport& report);
std::string backtest_metrics_csv(const BacktestReport& report);
/// valuation_date,series,value with series "truth" or an estimator label.
std::string backtest_plot_csv(const BacktestReport& report);

/// Reporting probability as a step function of elapsed time tau - T.
/// `edges` start at 0; an empty profile uses the configuration's hazard.
struct InclusionProfile {
  std::vector<double> edges;
  std::vector<double> values;

  double operator()(double elapsed) const;
  bool empty() const noexcept { return edges.empty(); }
};

struct IdentityReport {
  std::size_t replicates = 0;
  double lhs_mean = 0.0;  // mean unreported liability
  double rhs_mean = 0.0;  // mean odds-weighted reported liability
  double gap = 0.0;       // lhs_mean - rhs_mean
  double relative_gap = 0.0;
  double standard_error = 0.0;  // of the paired difference mean
  double z = 0.0;
};

/// Monte Carlo check of E[L^IBNR] = E[sum odds * Y over reported claims].
/// With a profile, each incurred claim is reported independently with
/// probability profile(tau - T); otherwise the configuration's delays decide,
/// and the delay model must not depend on covariates or severity.
IdentityReport validate_ipw_identity(const SimConfig& config, double tau, std::size_t replicates,
                                     const InclusionProfile& profile = {}, unsigned threads = 1);

enum class PiSource { oracle, distorted };
enum class SeveritySource { unbiased, biased };

struct RobustnessOptions {
  double tau = 30.0;
  std::size_t replicates = 400;
  double distortion = 1.3;
  double severity_bias = 1.5;
  double cohort_width = 1.0;
  double clamp_floor = default_clamp_floor;
  unsigned threads = 1;
};

struct RobustnessCell {
  PiSource pi = PiSource::oracle;
  SeveritySource severity = SeveritySource::unbiased;
  double truth = 0.0;  // exact E[L^IBNR]
  double aipw_mean = 0.0, ipw_mean = 0.0, ml_mean = 0.0;
  double aipw_bias = 0.0, ipw_bias = 0.0, ml_bias = 0.0;  // relative
  double aipw_se = 0.0, ipw_se = 0.0, ml_se = 0.0;        // relative MC standard errors
};

/// All four (pi, severity) cells on common simulated replicates. The correct
/// severity model is E[Y | x], which describes reported and unreported claims
/// alike only when reporting does not depend on severity, so the
/// configuration must have gamma = 0. The biased model scales it by
/// `severity_bias`; distorted probabilities are the cohort means of the true
/// ones on a pilot replicate times `distortion`, clamped to [floor, 1].
std::vector<RobustnessCell> double_robustness_grid(const SimConfig& config, const RobustnessOptions& options);

Json to_json(const IdentityReport& report);
Json to_json(std::span<const RobustnessCell> cells);

}  // namespace ibnr
