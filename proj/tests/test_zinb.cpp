#include <doctest.h>

#include <cmath>
#include <random>

#include "ibnr/zinb.hpp"

using namespace ibnr;

namespace {

double poisson_pmf(long k, double mean) {
  return std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
}

// P(N^IBNR = k | N^R = n) from the joint law of the full count and its binomial thinning
std::vector<double> enumerated_law(double q, double scale, double r, double p, long n, long kmax) {
  std::vector<double> w(static_cast<std::size_t>(kmax) + 1);
  double total = 0.0;
  for (long k = 0; k <= kmax; ++k) {
    const double log_binom = std::lgamma(n + k + 1.0) - std::lgamma(n + 1.0) - std::lgamma(k + 1.0);
    const double thin = std::exp(log_binom + n * std::log(p) + k * std::log1p(-p));
    w[static_cast<std::size_t>(k)] = zinb_pmf(n + k, q, scale, r) * thin;
    total += w[static_cast<std::size_t>(k)];
  }
  for (auto& v : w) v /= total;
  return w;
}

struct Truth {
  std::vector<double> beta_zero{-0.8, 0.6, 0.4};
  std::vector<double> beta_mean{-0.5, 0.3};
  double r = 1.5;
};

FrequencyData simulate_counts(const Truth& t, std::size_t n, std::uint64_t seed, bool inflate = true) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ux(-1.0, 1.0), uxi(0.5, 1.5), up(0.3, 0.9);
  FrequencyData d;
  d.zero_design.resize(static_cast<Eigen::Index>(n), 3);
  d.mean_design.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double x = ux(gen), xi = uxi(gen), p = up(gen);
    d.zero_design.row(ii) << 1.0, x, xi;
    d.mean_design.row(ii) << 1.0, x;
    const double q = inflate ? 1.0 / (1.0 + std::exp(-(t.beta_zero[0] + t.beta_zero[1] * x + t.beta_zero[2] * xi))) : 0.0;
    const double theta = std::exp(t.beta_mean[0] + t.beta_mean[1] * x);
    double k = 0.0;
    if (std::bernoulli_distribution(1.0 - q)(gen)) {
      const double lambda = std::gamma_distribution<double>(t.r, theta * xi * p)(gen);
      k = static_cast<double>(std::poisson_distribution<long>(lambda)(gen));
    }
    d.policy_idx.push_back(i);
    d.counts.push_back(k);
    d.exposure.push_back(xi);
    d.p.push_back(p);
  }
  return d;
}

}  // namespace

TEST_CASE("zinb pmf examples") {
  CHECK(zinb_pmf(0, 1.0, 2.0, 3.0) == 1.0);
  CHECK(zinb_pmf(3, 1.0, 2.0, 3.0) == 0.0);
  double total = 0.0;
  for (long k = 0; k <= 200; ++k) total += zinb_pmf(k, 0.0, 1.5, 2.5);
  CHECK(total > 1.0 - 1e-10);
  CHECK(zinb_pmf(0, 0.3, 1.0, 2.0) == doctest::Approx(0.3 + 0.7 * 0.25));
  CHECK(nb_pmf(1, 1.0, 1.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(zinb_pmf(-1, 0.0, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(zinb_pmf(0, 1.5, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(zinb_pmf(0, 0.0, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("Poisson limit with the mean held at 2") {
  const double r = 1e6;
  for (long k = 0; k <= 10; ++k) CHECK(std::abs(zinb_pmf(k, 0.0, 2.0 / r, r) - poisson_pmf(k, 2.0)) < 1e-4);
}

TEST_CASE("conditional law examples") {
  auto law = ibnr_conditional(CountFamily::zinb, 0.3, 0.8, 2.0, 1.2, 0.0, 0);
  CHECK(law.q_tilde == doctest::Approx(0.3));
  CHECK(law.theta_tilde == doctest::Approx(0.8));
  CHECK(law.r_tilde == doctest::Approx(2.0));

  law = ibnr_conditional(CountFamily::zinb, 0.3, 0.8, 2.0, 1.2, 0.4, 2);
  CHECK(law.r_tilde == doctest::Approx(4.0));
  CHECK(law.q_tilde == 0.0);

  CHECK(expected_ibnr_count(ibnr_conditional(CountFamily::zinb, 0.3, 0.8, 2.0, 1.2, 1.0, 1)) == 0.0);
  CHECK(expected_ibnr_count(ibnr_conditional(CountFamily::zinb, 1.0, 0.8, 2.0, 1.2, 0.4, 0)) == 0.0);

  // Poisson family: lambda = (1 - p) xi theta whatever was reported
  const auto pois = ibnr_conditional(CountFamily::poisson, 0.0, 0.8, 0.0, 1.2, 0.4, 3);
  CHECK(expected_ibnr_count(pois) == doctest::Approx(0.6 * 1.2 * 0.8).epsilon(1e-15));
  CHECK(pois.pmf(2) == doctest::Approx(poisson_pmf(2, 0.6 * 1.2 * 0.8)));
}

TEST_CASE("conditional law matches enumeration") {
  struct Case {
    double q, theta, r, xi, p;
    long n;
  };
  for (const auto& c : {Case{0.3, 0.8, 2.0, 1.2, 0.4, 0}, Case{0.1, 2.5, 0.7, 0.6, 0.85, 0},
                        Case{0.5, 0.3, 3.0, 1.0, 0.2, 3}, Case{0.0, 1.0, 1.0, 1.4, 0.6, 1}}) {
    const auto law = ibnr_conditional(CountFamily::zinb, c.q, c.theta, c.r, c.xi, c.p, c.n);
    const auto oracle = enumerated_law(c.q, c.theta * c.xi, c.r, c.p, c.n, 400);
    double tv = 0.0, mean = 0.0;
    for (long k = 0; k <= 400; ++k) {
      tv += std::abs(law.pmf(k) - oracle[static_cast<std::size_t>(k)]);
      mean += k * oracle[static_cast<std::size_t>(k)];
    }
    CHECK(0.5 * tv < 1e-10);
    CHECK(expected_ibnr_count(law) == doctest::Approx(mean).epsilon(1e-10));
  }
}

TEST_CASE("expected IBNR count falls as p rises") {
  double prev = 1e9;
  for (double p : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    const double v = expected_ibnr_count(ibnr_conditional(CountFamily::zinb, 0.2, 0.9, 1.5, 1.0, p, 0));
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("fit recovers simulated parameters") {
  const Truth t;
  const auto d = simulate_counts(t, 50000, 17);
  const auto m = fit_zinb(d);
  CHECK(m.diagnostics.converged);
  REQUIRE(m.standard_errors.size() == 6);
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(m.beta_zero[k] - t.beta_zero[k]) < 3.0 * m.standard_errors[k]);
  for (std::size_t k = 0; k < 2; ++k)
    CHECK(std::abs(m.beta_mean[k] - t.beta_mean[k]) < 3.0 * m.standard_errors[3 + k]);
  CHECK(std::abs(std::log(m.dispersion) - std::log(t.r)) < 3.0 * m.standard_errors[5]);
  CHECK_FALSE(m.zero_boundary);
}

TEST_CASE("no zero inflation is flagged at the boundary") {
  const Truth t;
  const auto d = simulate_counts(t, 20000, 18, false);
  const auto m = fit_zinb(d);
  CHECK(m.zero_boundary);
  CHECK_FALSE(m.diagnostics.warnings.empty());
}

TEST_CASE("Poisson fit on Poisson counts") {
  std::mt19937_64 gen(4);
  FrequencyData d;
  const int n = 20000;
  d.zero_design.resize(n, 1);
  d.mean_design.resize(n, 1);
  double total = 0.0, offset = 0.0;
  for (int i = 0; i < n; ++i) {
    d.zero_design(i, 0) = 1.0;
    d.mean_design(i, 0) = 1.0;
    const double xi = 0.5 + (i % 10) / 10.0, p = 0.3 + (i % 7) / 10.0;
    const double k = static_cast<double>(std::poisson_distribution<long>(0.7 * xi * p)(gen));
    d.policy_idx.push_back(static_cast<std::size_t>(i));
    d.counts.push_back(k);
    d.exposure.push_back(xi);
    d.p.push_back(p);
    total += k;
    offset += xi * p;
  }
  ZinbFitOptions opts;
  opts.family = CountFamily::poisson;
  const auto m = fit_zinb(d, opts);
  // Poisson MLE with one intercept: theta = sum k / sum offset
  CHECK(std::exp(m.beta_mean[0]) == doctest::Approx(total / offset).epsilon(1e-10));
  const std::vector<double> row{1.0};
  const auto law = ibnr_conditional(m, row, row, 1.3, 0.25, 4);
  CHECK(expected_ibnr_count(law) == doctest::Approx(0.75 * 1.3 * total / offset).epsilon(1e-10));
}

TEST_CASE("all-zero counts are degenerate") {
  const Truth t;
  auto d = simulate_counts(t, 100, 2);
  for (auto& k : d.counts) k = 0.0;
  CHECK_THROWS_AS(fit_zinb(d), DegenerateFit);
}
