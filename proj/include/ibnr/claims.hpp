#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ibnr {

/// Default lower bound applied when inclusion probabilities are packed.
inline constexpr double default_clamp_floor = 1e-4;

struct Claim {
  std::string claim_id;
  std::string policy_id;
  double accident_time = 0.0;
  double report_delay = 0.0;
  double severity = 1.0;
  std::vector<double> covariates;

  double report_time() const noexcept { return accident_time + report_delay; }
};

struct PolicyRecord {
  std::string policy_id;
  double exposure = 1.0;
  std::vector<double> covariates;
  double contract_start = 0.0;
  double contract_end = 1.0;

  /// Length of the contract window that lies in [contract_start, min(contract_end, tau)].
  double elapsed_length(double tau) const noexcept;
};

/// Policies plus their claims. Construction through `make` validates the
/// cross-references; the fields stay public for read access.
class Portfolio {
public:
  Portfolio() = default;

  /// Throws InvalidArgument when a claim breaks a type invariant or refers
  /// to an unknown policy or lies outside its contract window.
  static Portfolio make(std::vector<PolicyRecord> policies, std::vector<Claim> claims,
                        std::vector<std::string> covariate_schema);

  const std::vector<PolicyRecord>& policies() const noexcept { return policies_; }
  const std::vector<Claim>& claims() const noexcept { return claims_; }
  const std::vector<std::string>& covariate_schema() const noexcept { return schema_; }

  std::size_t policy_index(const std::string& policy_id) const;
  const PolicyRecord& policy_of(const Claim& claim) const;

private:
  std::vector<PolicyRecord> policies_;
  std::vector<Claim> claims_;
  std::vector<std::string> schema_;
  std::unordered_map<std::string, std::size_t> policy_lookup_;
};

/// Reported / unreported split of a portfolio at valuation time tau.
/// `future_idx` holds claims with accident time after tau (not yet incurred).
struct ValuationContext {
  double tau = 0.0;
  std::vector<std::size_t> reported_idx;
  std::vector<std::size_t> unreported_idx;
  std::vector<std::size_t> future_idx;
};

ValuationContext partition(const Portfolio& portfolio, double tau);
ValuationContext partition(std::span<const Claim> claims, double tau);

enum class ProbabilitySource { model, chain_ladder_implied, oracle, fixed };

const char* to_string(ProbabilitySource source) noexcept;

/// Per-reported-claim inclusion probabilities, clamped to [clamp_floor, 1].
class InclusionProbabilities {
public:
  InclusionProbabilities() = default;

  /// Values must lie in [0, 1]; those below the floor are raised to it.
  static InclusionProbabilities make(std::vector<double> raw, ProbabilitySource source,
                                     double clamp_floor = default_clamp_floor);

  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }
  ProbabilitySource source() const noexcept { return source_; }
  double clamp_floor() const noexcept { return clamp_floor_; }
  std::size_t clamped_count() const noexcept { return clamped_; }

private:
  std::vector<double> values_;
  ProbabilitySource source_ = ProbabilitySource::model;
  double clamp_floor_ = default_clamp_floor;
  std::size_t clamped_ = 0;
};

/// (1 - pi) / pi. Requires pi in (0, 1]; callers clamp first.
double odds_ratio(double pi);

/// Odds-ratio weights for every stored probability.
std::vector<double> odds_weights(const InclusionProbabilities& pis);

/// Copies the selected claims' severities.
std::vector<double> severities(const Portfolio& portfolio, std::span<const std::size_t> idx);

}  // namespace ibnr
