#include "ibnr/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include "ibnr/config.hpp"
#include "ibnr/errors.hpp"
#include "ibnr/parallel.hpp"
#include "ibnr/rng.hpp"

namespace ibnr {

namespace {

constexpr std::uint64_t policy_stream = 0x706f6c6963790001ULL;
constexpr std::uint64_t claim_stream = 0x636c61696d730002ULL;

double linear(const std::vector<double>& coef, std::span<const double> x) {
  double s = coef[0];
  for (std::size_t k = 0; k < x.size(); ++k) s += coef[k + 1] * x[k];
  return s;
}

double standard_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Gauss-Legendre over z on fixed pieces covering the standard normal mass.
template <typename F>
double normal_expectation(F&& f, double shift) {
  const double cuts[] = {-9.0, -3.0, 0.0, 3.0, 9.0 + std::max(0.0, shift)};
  double total = 0.0;
  for (int s = 0; s < 4; ++s) {
    total += boost::math::quadrature::gauss<double, 64>::integrate(
        [&](double z) { return standard_normal_pdf(z) * f(z); }, cuts[s], cuts[s + 1]);
  }
  return total;
}

}  // namespace

void SimConfig::validate() const {
  if (n_policies == 0) throw InvalidArgument("sim config: n_policies must be > 0");
  if (!(contract_length > 0.0) || !(horizon >= contract_length))
    throw InvalidArgument("sim config: need 0 < contract_length <= horizon");
  const auto d = covariates.dimension;
  if (!(covariates.high >= covariates.low)) throw InvalidArgument("sim config: covariate range is empty");
  if (!(covariates.exposure_low > 0.0) || !(covariates.exposure_high >= covariates.exposure_low))
    throw InvalidArgument("sim config: exposure range must be positive");
  if (frequency.mean_coef.size() != d + 1) throw InvalidArgument("sim config: frequency mean_coef needs d+1 entries");
  if (frequency.family == CountFamily::zinb) {
    if (frequency.zero_coef.size() != d + 2)
      throw InvalidArgument("sim config: frequency zero_coef needs d+2 entries");
    if (!(frequency.dispersion > 0.0)) throw InvalidArgument("sim config: dispersion must be > 0");
  }
  if (severity.beta.size() != d + 1) throw InvalidArgument("sim config: severity beta needs d+1 entries");
  if (!(severity.sigma > 0.0)) throw InvalidArgument("sim config: severity sigma must be > 0");
  if (delay.bin_edges.empty()) throw InvalidArgument("sim config: delay bins are empty");
  check_bin_edges(delay.bin_edges);
  if (delay.rates.size() != delay.bin_edges.size())
    throw InvalidArgument("sim config: one delay rate per bin is required");
  for (double r : delay.rates)
    if (!(r > 0.0)) throw InvalidArgument("sim config: delay rates must be > 0");
  if (delay.coef.size() != d) throw InvalidArgument("sim config: delay coef needs d entries");
}

StepHazard SimConfig::baseline() const { return StepHazard(delay.bin_edges, delay.rates); }

std::vector<std::string> SimConfig::covariate_schema() const {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < covariates.dimension; ++k) names.push_back("x" + std::to_string(k + 1));
  return names;
}

std::vector<PolicyRecord> draw_policies(const SimConfig& config) {
  config.validate();
  std::vector<PolicyRecord> out(config.n_policies);
  const double latest_start = config.horizon - config.contract_length;
  for (std::size_t j = 0; j < out.size(); ++j) {
    auto rng = CounterRng::substream(config.seed, policy_stream, j);
    auto& p = out[j];
    p.policy_id = "p" + std::to_string(j);
    p.contract_start = latest_start * rng.uniform_open();
    p.contract_end = p.contract_start + config.contract_length;
    p.exposure = config.covariates.exposure_low +
                 (config.covariates.exposure_high - config.covariates.exposure_low) * rng.uniform_open();
    p.covariates.resize(config.covariates.dimension);
    for (auto& x : p.covariates) x = config.covariates.low + (config.covariates.high - config.covariates.low) * rng.uniform_open();
  }
  return out;
}

CountParameters count_parameters(const SimConfig& config, const PolicyRecord& policy) {
  CountParameters c;
  const double theta = std::exp(linear(config.frequency.mean_coef, policy.covariates));
  c.scale = policy.exposure * theta;
  if (config.frequency.family == CountFamily::zinb) {
    double a = linear(config.frequency.zero_coef, policy.covariates);
    a += config.frequency.zero_coef.back() * policy.exposure;
    c.q = 1.0 / (1.0 + std::exp(-a));
  }
  return c;
}

double expected_claim_count(const SimConfig& config, const PolicyRecord& policy) {
  const auto c = count_parameters(config, policy);
  if (config.frequency.family == CountFamily::poisson) return c.scale;
  return (1.0 - c.q) * config.frequency.dispersion * c.scale;
}

double delay_multiplier(const SimConfig& config, std::span<const double> covariates, double severity) {
  double eta = config.delay.gamma * std::log(severity);
  for (std::size_t k = 0; k < covariates.size(); ++k) eta += config.delay.coef[k] * covariates[k];
  return std::exp(eta);
}

std::vector<SimClaim> draw_claims(const SimConfig& config, std::span<const PolicyRecord> policies,
                                  std::uint64_t replicate, unsigned threads) {
  config.validate();
  const StepHazard base = config.baseline();
  const double r = config.frequency.dispersion;
  std::vector<std::vector<SimClaim>> per(policies.size());
  parallel_for(policies.size(), threads, [&](std::size_t j) {
    const auto& pol = policies[j];
    auto rng = CounterRng::substream(config.seed, claim_stream, replicate, j);
    const auto cp = count_parameters(config, pol);
    long n = 0;
    if (config.frequency.family == CountFamily::poisson) {
      n = std::poisson_distribution<long>(cp.scale)(rng);
    } else if (rng.uniform_open() >= cp.q) {
      const double lambda = std::gamma_distribution<double>(r, cp.scale)(rng);
      n = lambda > 0.0 ? std::poisson_distribution<long>(lambda)(rng) : 0;
    }
    auto& out = per[j];
    out.reserve(static_cast<std::size_t>(n));
    std::normal_distribution<double> normal;
    const double mu = linear(config.severity.beta, pol.covariates);
    for (long k = 0; k < n; ++k) {
      SimClaim c;
      c.policy = j;
      c.ordinal = static_cast<std::uint32_t>(k);
      c.accident_time = pol.contract_start + (pol.contract_end - pol.contract_start) * rng.uniform_open();
      c.severity = std::exp(mu + config.severity.sigma * normal(rng));
      const double e = -std::log(rng.uniform_open());
      c.report_delay = base.inverse_cumulative(e / delay_multiplier(config, pol.covariates, c.severity));
      out.push_back(c);
    }
  });
  std::size_t total = 0;
  for (const auto& v : per) total += v.size();
  std::vector<SimClaim> claims;
  claims.reserve(total);
  for (const auto& v : per) claims.insert(claims.end(), v.begin(), v.end());
  return claims;
}

Portfolio to_portfolio(const SimConfig& config, std::vector<PolicyRecord> policies, std::span<const SimClaim> claims,
                       std::uint64_t replicate) {
  std::vector<Claim> out;
  out.reserve(claims.size());
  const std::string prefix = replicate == 0 ? "c" : "r" + std::to_string(replicate) + "c";
  for (const auto& s : claims) {
    Claim c;
    c.policy_id = policies[s.policy].policy_id;
    c.claim_id = prefix + std::to_string(s.policy) + "_" + std::to_string(s.ordinal);
    c.accident_time = s.accident_time;
    c.report_delay = s.report_delay;
    c.severity = s.severity;
    c.covariates = policies[s.policy].covariates;
    out.push_back(std::move(c));
  }
  return Portfolio::make(std::move(policies), std::move(out), config.covariate_schema());
}

Portfolio simulate(const SimConfig& config, unsigned threads) {
  auto policies = draw_policies(config);
  const auto claims = draw_claims(config, policies, 0, threads);
  return to_portfolio(config, std::move(policies), claims, 0);
}

double true_inclusion_probability(const SimConfig& config, std::span<const double> covariates, double severity,
                                  double accident_time, double tau) {
  if (tau < accident_time) throw InvalidArgument("true_inclusion_probability: tau precedes the accident time");
  const double h = config.baseline().cumulative(tau - accident_time);
  return -std::expm1(-delay_multiplier(config, covariates, severity) * h);
}

double true_inclusion_probability(const SimConfig& config, const Claim& claim, double tau) {
  return true_inclusion_probability(config, claim.covariates, claim.severity, claim.accident_time, tau);
}

double expected_severity(const SimConfig& config, std::span<const double> covariates) {
  const double s = config.severity.sigma;
  return std::exp(linear(config.severity.beta, covariates) + 0.5 * s * s);
}

double expected_reported_severity(const SimConfig& config, std::span<const double> covariates,
                                  double accident_time, double tau) {
  if (tau < accident_time) throw InvalidArgument("expected_reported_severity: tau precedes the accident time");
  const double mu = linear(config.severity.beta, covariates);
  const double s = config.severity.sigma;
  const double h = config.baseline().cumulative(tau - accident_time);
  double x_eta = 0.0;
  for (std::size_t k = 0; k < covariates.size(); ++k) x_eta += config.delay.coef[k] * covariates[k];
  const double g = config.delay.gamma;
  auto pi = [&](double z) { return -std::expm1(-std::exp(x_eta + g * (mu + s * z)) * h); };
  const double den = normal_expectation(pi, s);
  if (!(den > 0.0)) throw InvalidArgument("expected_reported_severity: reporting probability is zero");
  const double num = normal_expectation([&](double z) { return std::exp(mu + s * z) * pi(z); }, s);
  return num / den;
}

PolicyExpectation expected_ibnr(const SimConfig& config, const PolicyRecord& policy, double tau) {
  PolicyExpectation out;
  const double lo = policy.contract_start;
  const double hi = std::min(policy.contract_end, tau);
  if (!(hi > lo)) return out;
  const StepHazard base = config.baseline();
  const double n = expected_claim_count(config, policy) / (policy.contract_end - policy.contract_start);
  const double mu = linear(config.severity.beta, policy.covariates);
  const double s = config.severity.sigma;
  double x_eta = 0.0;
  for (std::size_t k = 0; k < policy.covariates.size(); ++k) x_eta += config.delay.coef[k] * policy.covariates[k];
  const double g = config.delay.gamma;
  // unreported time: substitute e = tau - T, e in [tau - hi, tau - lo]
  auto unreported = [&](double z) {
    return base.survival_integral(tau - hi, tau - lo, std::exp(x_eta + g * (mu + s * z)));
  };
  using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double zmax = 12.0 + s;
  if (g == 0.0) {
    out.ibnr_count = n * unreported(0.0);
    out.ibnr_liability = out.ibnr_count * std::exp(mu + 0.5 * s * s);
  } else {
    out.ibnr_count = n * gk::integrate([&](double z) { return standard_normal_pdf(z) * unreported(z); }, -12.0, zmax,
                                       8, 1e-13);
    out.ibnr_liability =
        n * gk::integrate([&](double z) { return standard_normal_pdf(z) * std::exp(mu + s * z) * unreported(z); },
                          -12.0, zmax, 8, 1e-13);
  }
  return out;
}

TruthAtDate realized_truth(const Portfolio& portfolio, double tau) {
  TruthAtDate t;
  t.tau = tau;
  for (const auto& c : portfolio.claims()) {
    if (c.accident_time > tau) continue;
    if (c.report_time() <= tau) {
      t.reported_liability += c.severity;
      ++t.reported_count;
    } else {
      t.ibnr_liability += c.severity;
      ++t.ibnr_count;
    }
  }
  return t;
}

GroundTruth ground_truth(const SimConfig& config, const Portfolio& portfolio, std::span<const double> grid,
                         unsigned threads) {
  GroundTruth gt;
  for (double tau : grid) {
    auto t = realized_truth(portfolio, tau);
    const auto& pols = portfolio.policies();
    std::vector<PolicyExpectation> per(pols.size());
    parallel_for(pols.size(), threads, [&](std::size_t j) { per[j] = expected_ibnr(config, pols[j], tau); });
    for (const auto& e : per) {
      t.expected_ibnr_count += e.ibnr_count;
      t.expected_ibnr_liability += e.ibnr_liability;
    }
    gt.dates.push_back(t);
  }
  return gt;
}

std::string ground_truth_json(const SimConfig& config, const GroundTruth& truth) {
  nlohmann::ordered_json j;
  j["generative_model"] = sim_config_to_json(config);
  auto& rows = j["valuation_dates"];
  rows = nlohmann::ordered_json::array();
  for (const auto& t : truth.dates) {
    nlohmann::ordered_json r;
    r["tau"] = t.tau;
    r["reported_liability"] = t.reported_liability;
    r["reported_count"] = t.reported_count;
    r["ibnr_liability"] = t.ibnr_liability;
    r["ibnr_count"] = t.ibnr_count;
    r["expected_ibnr_liability"] = t.expected_ibnr_liability;
    r["expected_ibnr_count"] = t.expected_ibnr_count;
    rows.push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

}  // namespace ibnr
