#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ibnr/claims.hpp"
#include "ibnr/errors.hpp"

namespace ibnr {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.9;
  std::string method;
};

struct ReserveEstimate {
  std::string label;
  double point = 0.0;
  double model_term = 0.0;
  double augmentation_term = 0.0;
  double ipw_term = 0.0;
  double min_pi = 1.0;
  double max_pi = 1.0;
  std::size_t clamped = 0;
  std::optional<Interval> interval;
};

/// Cumulative run-off triangle. Row k is accident period k, column d the
/// development period; cells with k + d >= periods are unknown.
struct Triangle {
  std::vector<std::vector<double>> cumulative;  // ragged: row k has periods - k entries
  double period_width = 1.0;
  double origin = 0.0;

  std::size_t periods() const noexcept { return cumulative.size(); }
};

/// Period index of time t: ceil((t - origin) / width) - 1, so a time on a
/// boundary belongs to the earlier period. Times at or before origin map to 0.
long period_of(double t, double origin, double width);

/// Number of periods up to tau: ceil((tau - origin) / width).
std::size_t period_count(double tau, double origin, double width);

/// Builds the triangle of reported amounts (or counts) at the context's tau.
Triangle build_triangle(const Portfolio& portfolio, const ValuationContext& context, double period_width,
                        double origin = 0.0, bool counts = false);

/// Triangle from explicit cumulative rows; checks the run-off shape.
Triangle make_triangle(std::vector<std::vector<double>> rows, double period_width = 1.0, double origin = 0.0);

struct ChainLadderResult {
  ReserveEstimate estimate;
  std::vector<double> factors;      // f_d from development d to d+1
  std::vector<double> to_ultimate;  // F_k per accident period
  std::vector<double> implied_pi;   // 1 / F_k
  std::vector<double> latest;       // latest diagonal per accident period
};

/// Volume-weighted chain ladder. Throws EstimatorUndefined when a factor has
/// a zero denominator.
ChainLadderResult chain_ladder(const Triangle& triangle);

/// Per-claim CL-implied probabilities 1/F_k for the reported claims of the
/// context, k the accident period. Throws UndefinedCohort when a period up to
/// tau has no reported claim.
InclusionProbabilities cohort_probabilities(const Portfolio& portfolio, const ValuationContext& context,
                                            const ChainLadderResult& cl, double period_width, double origin = 0.0);

/// sum odds(pi_i) y_i.
ReserveEstimate ipw_reserve(std::span<const double> y, const InclusionProbabilities& pis);

/// model_total + sum odds(pi_i) (y_i - yhat_i).
ReserveEstimate aipw_reserve(std::span<const double> y, std::span<const double> yhat, double model_total,
                             const InclusionProbabilities& pis);

/// aipw_reserve with chain-ladder implied probabilities.
ReserveEstimate aipw_cl_reserve(std::span<const double> y, std::span<const double> yhat, double model_total,
                                const InclusionProbabilities& cl_pis);

/// sum_j lambda_j yhat_j.
ReserveEstimate ml_reserve(std::span<const double> lambda, std::span<const double> yhat,
                           const std::string& label = "ML");

struct CredibilityResult {
  double convex = 0.0;      // Z * cl_ultimate + (1 - Z) * expert_ultimate
  double rearranged = 0.0;  // expert + Z * (L^R - expert * pi) / pi
};

/// Both forms of the credibility ultimate. cl_pi = L^R / cl_ultimate.
CredibilityResult credibility_ultimate(double cl_ultimate, double expert_ultimate, double z, double cl_pi);

/// Credibility reserve: credibility ultimate minus the reported amount
/// L^R = cl_pi * cl_ultimate.
ReserveEstimate credibility_reserve(double cl_ultimate, double expert_ultimate, double z, double cl_pi);

enum class EstimatorKind { cl, ipw, aipw, aipw_cl, ml, ml_wbp, ml_wl, cred };

const char* to_string(EstimatorKind kind) noexcept;

/// Parses a registry name (CL, IPW, AIPW, AIPW-CL, ML, ML-wBP, ML-WL, CRED),
/// throwing UnknownEstimator otherwise.
EstimatorKind parse_estimator(const std::string& name);

/// Comma-separated list; empty string gives an empty set. Duplicates are dropped.
std::vector<EstimatorKind> parse_estimator_list(const std::string& list);

std::span<const EstimatorKind> all_estimators() noexcept;

/// valuation_date,estimator,point,model_term,augmentation_term,interval_lo,interval_hi
void write_estimates_header(std::ostream& out);
void write_estimate_row(std::ostream& out, double valuation_date, const ReserveEstimate& estimate);

}  // namespace ibnr
