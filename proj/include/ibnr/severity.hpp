#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ibnr/claims.hpp"
#include "ibnr/errors.hpp"

namespace ibnr {

enum class SeverityMode { plain, weighted, plain_wbp };

const char* to_string(SeverityMode mode) noexcept;

/// Lognormal regression log Y ~ N(b0 + x'b, sigma^2), optionally rescaled by
/// a calibration factor.
struct SeverityModel {
  std::vector<double> beta;  // intercept first
  double sigma = 1.0;
  SeverityMode mode = SeverityMode::plain;
  double wbp_b = 1.0;
  FitDiagnostics diagnostics;

  /// wbp_b * exp(b0 + x'b + sigma^2 / 2). `covariates` excludes the intercept.
  double predict_mean(std::span<const double> covariates) const;
};

struct SeverityFitOptions {
  double ridge = 0.0;            // added to X'WX; 0 disables
  double fallback_ridge = 1e-8;  // used with a warning when X'WX is rank deficient
  bool allow_ridge_fallback = true;
};

/// Weighted least squares on log y (rows of X include the intercept column).
/// Empty weights means all ones. sigma^2 = weighted RSS / total weight.
SeverityModel fit_lognormal(const Eigen::MatrixXd& design, std::span<const double> log_y,
                            std::span<const double> weights = {}, const SeverityFitOptions& options = {});

/// Fit on the claims `idx` of a portfolio, design [1, covariates].
SeverityModel fit_lognormal(const Portfolio& portfolio, std::span<const std::size_t> idx,
                            std::span<const double> weights = {}, const SeverityFitOptions& options = {});

/// Weighted lognormal log-likelihood at params = (beta, log sigma), with the
/// gradient filled when non-null.
double lognormal_log_likelihood(const Eigen::MatrixXd& design, std::span<const double> log_y,
                                std::span<const double> weights, const Eigen::VectorXd& params,
                                Eigen::VectorXd* gradient = nullptr);

struct CappedWeights {
  std::vector<double> weights;
  double cap = 0.0;
  std::size_t capped = 0;
};

/// Caps weights at their `quantile` (linear interpolation); counts how many were lowered.
CappedWeights cap_weights(std::span<const double> weights, double quantile = 0.995);

/// Which weighted balance identity calibrate_wbp enforces.
enum class BalanceTarget { odds, inverse, unit };

BalanceTarget parse_balance_target(const std::string& name);

/// Sets wbp_b = sum w Y / sum w Yhat over the selected claims, with w the
/// odds ratio (1-pi)/pi by default. When every weight is zero, b = 1 and a
/// warning is recorded.
SeverityModel calibrate_wbp(const SeverityModel& model, const Portfolio& portfolio,
                            std::span<const std::size_t> idx, const InclusionProbabilities& pis,
                            BalanceTarget target = BalanceTarget::odds);

/// Predictions for the selected claims.
std::vector<double> predict_claims(const SeverityModel& model, const Portfolio& portfolio,
                                   std::span<const std::size_t> idx);

}  // namespace ibnr
