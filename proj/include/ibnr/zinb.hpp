#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ibnr/claims.hpp"
#include "ibnr/errors.hpp"

namespace ibnr {

enum class CountFamily { zinb, poisson };

const char* to_string(CountFamily family) noexcept;
CountFamily parse_count_family(const std::string& name);

/// Negative binomial pmf in scale form: C(k+r-1, k) theta^k (1+theta)^-(k+r),
/// mean r*theta.
double nb_pmf(long k, double theta, double r);

/// q 1{k=0} + (1-q) NB(k; theta, r).
double zinb_pmf(long k, double q, double theta, double r);

/// Reported-count regression data, one row per policy with positive offset.
struct FrequencyData {
  std::vector<std::size_t> policy_idx;  // into Portfolio::policies()
  Eigen::MatrixXd zero_design;          // [1, x, exposure] for logit(q)
  Eigen::MatrixXd mean_design;          // [1, x] for log(theta)
  std::vector<double> counts;           // reported claims per policy
  std::vector<double> exposure;         // xi times the elapsed contract fraction
  std::vector<double> p;                // average inclusion probability p_j(tau)
};

/// Policies whose contract has started by tau. `p` is indexed like
/// Portfolio::policies(); policies with p_j = 0 are kept (no information).
FrequencyData make_frequency_data(const Portfolio& portfolio, const ValuationContext& context,
                                  std::span<const double> p);

struct ZinbModel {
  CountFamily family = CountFamily::zinb;
  std::vector<double> beta_zero;  // logit(q); empty for poisson
  std::vector<double> beta_mean;  // log(theta)
  double dispersion = 1.0;        // r; unused for poisson
  bool zero_boundary = false;     // likelihood ratio against q = 0 not significant at 5%
  std::vector<double> standard_errors;
  FitDiagnostics diagnostics;

  double zero_probability(std::span<const double> zero_row) const;
  double theta(std::span<const double> mean_row) const;
};

struct ZinbFitOptions {
  CountFamily family = CountFamily::zinb;
  double hessian_ridge = 1e-8;
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
};

/// Log-likelihood of the reported counts at params = (beta_zero, beta_mean,
/// log r) for zinb or (beta_mean) for poisson. Offsets exposure*p enter the
/// NB scale (or Poisson mean).
double zinb_log_likelihood(const FrequencyData& data, CountFamily family, const Eigen::VectorXd& params,
                           Eigen::VectorXd* gradient = nullptr, Eigen::MatrixXd* hessian = nullptr);

/// Joint Newton on all parameters; when that fails, golden-section search on
/// log r with the regression coefficients profiled out, then a joint polish.
ZinbModel fit_zinb(const FrequencyData& data, const ZinbFitOptions& options = {});

/// Conditional law of the unreported count of one policy given its reported
/// count. `exposure` is xi times the elapsed contract fraction.
struct IbnrCountLaw {
  CountFamily family = CountFamily::zinb;
  double q_tilde = 0.0;
  double theta_tilde = 0.0;
  double r_tilde = 0.0;
  double thinning_complement = 1.0;  // 1 - p_j
  double exposure = 1.0;

  /// P(N^IBNR = k).
  double pmf(long k) const;
};

IbnrCountLaw ibnr_conditional(CountFamily family, double q, double theta, double r, double exposure, double p,
                              long n_reported);
IbnrCountLaw ibnr_conditional(const ZinbModel& model, std::span<const double> zero_row,
                              std::span<const double> mean_row, double exposure, double p, long n_reported);

/// (1 - q~) r~ (1 - p) exposure theta~; (1 - p) exposure theta for poisson.
double expected_ibnr_count(const IbnrCountLaw& law);

/// Laws for every row of `data`.
std::vector<IbnrCountLaw> ibnr_laws(const ZinbModel& model, const FrequencyData& data);

/// policy_id,q_tilde,theta_tilde,r_tilde,lambda_ibnr
void write_ibnr_law_csv(std::ostream& out, const Portfolio& portfolio, const FrequencyData& data,
                        std::span<const IbnrCountLaw> laws);

}  // namespace ibnr
