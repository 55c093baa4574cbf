#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ibnr/claims.hpp"
#include "ibnr/errors.hpp"
#include "ibnr/step_hazard.hpp"

namespace ibnr {

enum class SeverityEffect { none, linear_log, binned };
enum class TimeEffect { none, binned };

const char* to_string(SeverityEffect effect) noexcept;
const char* to_string(TimeEffect effect) noexcept;
SeverityEffect parse_severity_effect(const std::string& name);
TimeEffect parse_time_effect(const std::string& name);

/// Maps (claim covariates, severity, accident time) to the hazard's
/// covariate row. Binned effects use indicator columns for every bin but the
/// first; cut points are interior boundaries.
struct DelayFeatureSpec {
  std::vector<std::size_t> covariate_columns;
  SeverityEffect severity_effect = SeverityEffect::linear_log;
  std::vector<double> severity_cuts;  // on log severity
  TimeEffect time_effect = TimeEffect::none;
  std::vector<double> time_cuts;

  std::size_t dimension() const noexcept;
  std::vector<double> row(std::span<const double> covariates, double severity, double accident_time) const;
  void fill_row(std::span<const double> covariates, double severity, double accident_time,
                std::span<double> out) const;
};

/// Builds a spec with quantile cut points taken from the given claims.
DelayFeatureSpec make_feature_spec(std::vector<std::size_t> covariate_columns, SeverityEffect severity_effect,
                                   TimeEffect time_effect, std::span<const double> severities,
                                   std::span<const double> accident_times, std::size_t effect_bins = 4);

/// Reported claims prepared for the right-truncated likelihood.
struct DelayDesign {
  DelayFeatureSpec spec;
  Eigen::MatrixXd features;        // one row per reported claim
  std::vector<double> delays;      // observed U_i
  std::vector<double> truncation;  // tau - T_i >= U_i
  double severity_plugin = 1.0;    // median reported severity
};

DelayDesign make_delay_design(const Portfolio& portfolio, const ValuationContext& context,
                              const DelayFeatureSpec& spec);

/// Checks row count agreement and truncation >= delay for every claim.
void validate_design(const DelayDesign& design);

struct HazardModel {
  std::vector<double> bin_edges;
  std::vector<double> log_baseline;
  std::vector<double> beta;
  DelayFeatureSpec spec;
  double severity_plugin = 1.0;
  std::vector<double> standard_errors;  // baseline then beta
  FitDiagnostics diagnostics;

  double linear_predictor(std::span<const double> features) const;
  StepHazard baseline() const;
  double cumulative_hazard(std::span<const double> features, double elapsed) const;
};

struct HazardFitOptions {
  std::size_t bins = 8;
  std::vector<double> bin_edges;  // explicit grid; empty selects observed-delay quantiles
  double hessian_ridge = 1e-8;
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  double ridge_penalty = 0.0;
  double fallback_ridge_penalty = 1e-4;
};

/// Baseline grid at the observed-delay quantiles k/bins, deduplicated.
std::vector<double> quantile_bin_edges(std::span<const double> delays, std::size_t bins);

/// Right-truncated log-likelihood sum_i [log f(u_i) - log F(c_i)] at
/// params = (log baseline per bin, beta). Gradient/Hessian filled when non-null.
double truncated_log_likelihood(const DelayDesign& design, std::span<const double> bin_edges,
                                const Eigen::VectorXd& params, Eigen::VectorXd* gradient = nullptr,
                                Eigen::MatrixXd* hessian = nullptr);

/// Newton fit with line search. Throws ConvergenceFailure when the gradient
/// tolerance is not reached within max_iterations.
HazardModel fit_hazard(const DelayDesign& design, const HazardFitOptions& options = {});

/// 1 - exp(-cumulative hazard over [0, elapsed]) for a prepared feature row.
double inclusion_probability(const HazardModel& model, std::span<const double> features, double elapsed);

/// Inclusion probability of one claim at valuation tau.
double claim_inclusion_probability(const HazardModel& model, const Claim& claim, double tau);

/// Normal law of log severity for one policy.
struct LogSeverityLaw {
  double mean = 0.0;
  double sd = 0.0;
};

/// Average of the inclusion probability over accident times uniform on
/// [window_start, min(window_end, tau)]. Without `law` the severity term is
/// held at the model's plug-in value; with it the severity term is averaged
/// over the law (Gauss-Hermite for a linear effect, bin masses for a binned
/// one). Gauss-Legendre (64 nodes) on each smooth piece in time.
double average_inclusion_probability(const HazardModel& model, std::span<const double> covariates, double tau,
                                     double window_start, double window_end, const LogSeverityLaw* law = nullptr);

/// 16 (node, weight) pairs with sum w f(z) ~ E f(Z), Z standard normal.
const std::vector<std::pair<double, double>>& standard_normal_nodes();

/// Inclusion probabilities for the reported claims of `context`, clamped.
InclusionProbabilities model_inclusion_probabilities(const HazardModel& model, const Portfolio& portfolio,
                                                     const ValuationContext& context,
                                                     double clamp_floor = default_clamp_floor);

/// Chain-ladder implied probabilities 1/f_k for each reported claim, where
/// k is the claim's accident period of width `period_width` from `origin`.
/// Throws UndefinedCohort when an accident period has no reported claim.
InclusionProbabilities empirical_cohort_probabilities(const Portfolio& portfolio,
                                                      const ValuationContext& context, double period_width,
                                                      double origin = 0.0);

}  // namespace ibnr
