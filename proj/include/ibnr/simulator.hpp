#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ibnr/claims.hpp"
#include "ibnr/step_hazard.hpp"
#include "ibnr/zinb.hpp"

namespace ibnr {

struct CovariateSpec {
  std::size_t dimension = 2;
  double low = -1.0;  // each covariate ~ U[low, high]
  double high = 1.0;
  double exposure_low = 0.5;  // xi ~ U[exposure_low, exposure_high]
  double exposure_high = 1.5;
};

struct FrequencySpec {
  CountFamily family = CountFamily::zinb;
  std::vector<double> zero_coef{-1.0, 0.5, 0.0, 0.3};  // logit q on [1, x, xi]
  std::vector<double> mean_coef{-1.5, 0.4, 0.2};       // log theta on [1, x]
  double dispersion = 2.0;
};

struct SeveritySpec {
  std::vector<double> beta{1.0, 0.5, -0.3};  // on [1, x]
  double sigma = 1.0;
};

struct DelaySpec {
  std::vector<double> bin_edges{0.0, 0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> rates{1.0, 0.7, 0.45, 0.3, 0.2, 0.15};
  std::vector<double> coef{0.3, -0.2};  // on x
  double gamma = 0.5;                   // on log Y
};

/// Generative model: per-policy claim counts, accident times uniform over the
/// contract, lognormal severities, and reporting delays from a step hazard
/// with rate multiplier exp(x'coef + gamma log Y).
struct SimConfig {
  std::size_t n_policies = 10000;
  double horizon = 36.0;
  double contract_length = 12.0;  // starts ~ U[0, horizon - contract_length]
  CovariateSpec covariates;
  FrequencySpec frequency;
  SeveritySpec severity;
  DelaySpec delay;
  std::uint64_t seed = 1;

  /// Throws InvalidArgument on a degenerate configuration.
  void validate() const;
  StepHazard baseline() const;
  std::vector<std::string> covariate_schema() const;
};

/// Lean claim record used inside Monte Carlo loops.
struct SimClaim {
  std::size_t policy = 0;
  std::uint32_t ordinal = 0;
  double accident_time = 0.0;
  double report_delay = 0.0;
  double severity = 1.0;

  double report_time() const noexcept { return accident_time + report_delay; }
};

std::vector<PolicyRecord> draw_policies(const SimConfig& config);

/// Claims of replicate `replicate` for fixed policies. Each policy draws from
/// its own substream keyed by (seed, replicate, policy index).
std::vector<SimClaim> draw_claims(const SimConfig& config, std::span<const PolicyRecord> policies,
                                  std::uint64_t replicate, unsigned threads = 1);

Portfolio to_portfolio(const SimConfig& config, std::vector<PolicyRecord> policies, std::span<const SimClaim> claims,
                       std::uint64_t replicate = 0);

/// Policies and replicate-0 claims.
Portfolio simulate(const SimConfig& config, unsigned threads = 1);

/// Expected claim count of a policy over its whole contract.
double expected_claim_count(const SimConfig& config, const PolicyRecord& policy);

/// q and NB scale (or Poisson mean) of the full-contract count.
struct CountParameters {
  double q = 0.0;
  double scale = 0.0;
};
CountParameters count_parameters(const SimConfig& config, const PolicyRecord& policy);

/// exp(x'coef + gamma log y).
double delay_multiplier(const SimConfig& config, std::span<const double> covariates, double severity);

/// 1 - exp(-multiplier * H0(tau - T)). Throws when tau < T.
double true_inclusion_probability(const SimConfig& config, const Claim& claim, double tau);
double true_inclusion_probability(const SimConfig& config, std::span<const double> covariates, double severity,
                                  double accident_time, double tau);

/// exp(mu + sigma^2 / 2).
double expected_severity(const SimConfig& config, std::span<const double> covariates);

/// E[Y | reported by tau, T, x].
double expected_reported_severity(const SimConfig& config, std::span<const double> covariates,
                                  double accident_time, double tau);

/// E[Y] over claims of one policy that are incurred by tau but unreported,
/// and the corresponding count, integrating accident time and severity.
struct PolicyExpectation {
  double ibnr_count = 0.0;
  double ibnr_liability = 0.0;
};
PolicyExpectation expected_ibnr(const SimConfig& config, const PolicyRecord& policy, double tau);

/// Realized quantities of one portfolio at tau.
struct TruthAtDate {
  double tau = 0.0;
  double reported_liability = 0.0;
  double ibnr_liability = 0.0;
  std::size_t reported_count = 0;
  std::size_t ibnr_count = 0;
  double expected_ibnr_liability = 0.0;
  double expected_ibnr_count = 0.0;
};

TruthAtDate realized_truth(const Portfolio& portfolio, double tau);

struct GroundTruth {
  std::vector<TruthAtDate> dates;
};

/// Realized and expected reserves on a valuation grid.
GroundTruth ground_truth(const SimConfig& config, const Portfolio& portfolio, std::span<const double> grid,
                         unsigned threads = 1);

std::string ground_truth_json(const SimConfig& config, const GroundTruth& truth);

}  // namespace ibnr
