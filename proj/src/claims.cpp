#include "ibnr/claims.hpp"

#include <algorithm>
#include <cmath>

#include "ibnr/errors.hpp"

namespace ibnr {

double PolicyRecord::elapsed_length(double tau) const noexcept {
  return std::max(0.0, std::min(contract_end, tau) - contract_start);
}

Portfolio Portfolio::make(std::vector<PolicyRecord> policies, std::vector<Claim> claims,
                          std::vector<std::string> covariate_schema) {
  Portfolio p;
  const std::size_t width = covariate_schema.size();
  p.policy_lookup_.reserve(policies.size());
  for (std::size_t j = 0; j < policies.size(); ++j) {
    const auto& pol = policies[j];
    if (!(pol.exposure > 0.0) || !std::isfinite(pol.exposure))
      throw InvalidArgument("policy " + pol.policy_id + ": exposure must be > 0");
    if (!(pol.contract_start < pol.contract_end))
      throw InvalidArgument("policy " + pol.policy_id + ": contract_start must precede contract_end");
    if (pol.covariates.size() != width)
      throw InvalidArgument("policy " + pol.policy_id + ": covariate length does not match schema");
    if (!p.policy_lookup_.emplace(pol.policy_id, j).second)
      throw InvalidArgument("duplicate policy_id " + pol.policy_id);
  }
  for (const auto& c : claims) {
    if (!(c.accident_time >= 0.0) || !(c.report_delay >= 0.0) || !(c.severity > 0.0) ||
        !std::isfinite(c.severity) || !std::isfinite(c.report_delay))
      throw InvalidArgument("claim " + c.claim_id + ": requires T >= 0, U >= 0, Y > 0");
    if (c.covariates.size() != width)
      throw InvalidArgument("claim " + c.claim_id + ": covariate length does not match schema");
    auto it = p.policy_lookup_.find(c.policy_id);
    if (it == p.policy_lookup_.end())
      throw InvalidArgument("claim " + c.claim_id + " refers to unknown policy " + c.policy_id);
    const auto& pol = policies[it->second];
    if (c.accident_time < pol.contract_start || c.accident_time > pol.contract_end)
      throw InvalidArgument("claim " + c.claim_id + ": accident time outside contract window");
  }
  p.policies_ = std::move(policies);
  p.claims_ = std::move(claims);
  p.schema_ = std::move(covariate_schema);
  return p;
}

std::size_t Portfolio::policy_index(const std::string& policy_id) const {
  auto it = policy_lookup_.find(policy_id);
  if (it == policy_lookup_.end()) throw InvalidArgument("unknown policy " + policy_id);
  return it->second;
}

const PolicyRecord& Portfolio::policy_of(const Claim& claim) const {
  return policies_[policy_index(claim.policy_id)];
}

ValuationContext partition(std::span<const Claim> claims, double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("partition: tau must be > 0");
  ValuationContext ctx;
  ctx.tau = tau;
  for (std::size_t i = 0; i < claims.size(); ++i) {
    const auto& c = claims[i];
    if (c.accident_time > tau)
      ctx.future_idx.push_back(i);
    else if (c.report_time() <= tau)
      ctx.reported_idx.push_back(i);
    else
      ctx.unreported_idx.push_back(i);
  }
  return ctx;
}

ValuationContext partition(const Portfolio& portfolio, double tau) {
  return partition(std::span<const Claim>(portfolio.claims()), tau);
}

const char* to_string(ProbabilitySource source) noexcept {
  switch (source) {
    case ProbabilitySource::model: return "model";
    case ProbabilitySource::chain_ladder_implied: return "chain-ladder-implied";
    case ProbabilitySource::oracle: return "oracle";
    case ProbabilitySource::fixed: return "fixed";
  }
  return "unknown";
}

InclusionProbabilities InclusionProbabilities::make(std::vector<double> raw, ProbabilitySource source,
                                                    double clamp_floor) {
  if (!(clamp_floor > 0.0 && clamp_floor <= 1.0))
    throw InvalidArgument("clamp floor must lie in (0, 1]");
  InclusionProbabilities p;
  p.source_ = source;
  p.clamp_floor_ = clamp_floor;
  for (double& v : raw) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("inclusion probability outside [0, 1]");
    if (v < clamp_floor) {
      v = clamp_floor;
      ++p.clamped_;
    }
  }
  p.values_ = std::move(raw);
  return p;
}

double odds_ratio(double pi) {
  if (!(pi > 0.0 && pi <= 1.0)) throw InvalidArgument("odds_ratio: pi must lie in (0, 1]");
  return (1.0 - pi) / pi;
}

std::vector<double> odds_weights(const InclusionProbabilities& pis) {
  std::vector<double> w;
  w.reserve(pis.size());
  for (double p : pis.values()) w.push_back(odds_ratio(p));
  return w;
}

std::vector<double> severities(const Portfolio& portfolio, std::span<const std::size_t> idx) {
  std::vector<double> y;
  y.reserve(idx.size());
  for (auto i : idx) y.push_back(portfolio.claims()[i].severity);
  return y;
}

}  // namespace ibnr
