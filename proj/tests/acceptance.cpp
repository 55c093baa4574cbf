// Property and simulation checks of the reserving library, one line per check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <boost/math/distributions/chi_squared.hpp>

#include "ibnr/harness.hpp"
#include "ibnr/synthetic.hpp"

using namespace ibnr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SimConfig default_sim(std::size_t n, std::uint64_t seed) {
  SimConfig c;
  c.n_policies = n;
  c.seed = seed;
  return c;
}

double expected_ibnr_liability(const SimConfig& c, std::span<const PolicyRecord> policies, double tau) {
  double total = 0.0;
  for (const auto& p : policies) total += expected_ibnr(c, p, tau).ibnr_liability;
  return total;
}

Outcome ipw_unbiased() {
  const auto c = default_sim(10000, 101);
  const double tau = 24.0;
  const auto policies = draw_policies(c);
  const double truth = expected_ibnr_liability(c, policies, tau);
  const std::size_t reps = 10000;
  double sum = 0.0, sq = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto claims = draw_claims(c, policies, r + 1);
    std::vector<double> y, pi;
    for (const auto& cl : claims) {
      if (cl.report_time() > tau) continue;
      y.push_back(cl.severity);
      pi.push_back(true_inclusion_probability(c, policies[cl.policy].covariates, cl.severity, cl.accident_time, tau));
    }
    const double v = ipw_reserve(y, InclusionProbabilities::make(pi, ProbabilitySource::oracle)).point;
    sum += v;
    sq += v * v;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sq / reps - mean * mean) / reps);
  const double rel = (mean - truth) / truth;
  return {std::abs(rel) < 0.01, fmt("mean %.2f vs E[L] %.2f, rel bias %+.3f%% (MC se %.3f%%), tol 1%%", mean, truth,
                                    100 * rel, 100 * se / truth)};
}

Outcome identity() {
  const auto c = default_sim(5000, 202);
  const std::vector<InclusionProfile> profiles{{{0.0}, {0.5}}, {{0.0, 2.0, 6.0}, {0.2, 0.6, 0.9}}};
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    const auto r = validate_ipw_identity(c, 30.0, 10000, profiles[k]);
    pass = pass && std::abs(r.z) <= 3.0;
    detail += fmt("%s profile: gap %+.3f%% z %+.2f; ", k == 0 ? "constant" : "step", 100 * r.relative_gap, r.z);
  }
  return {pass, detail + "tol |z| <= 3"};
}

Outcome robustness() {
  auto c = default_sim(10000, 303);
  c.delay.gamma = 0.0;
  RobustnessOptions o;
  o.tau = 30.0;
  o.replicates = 1000;
  const auto cells = double_robustness_grid(c, o);
  bool pass = true;
  std::string detail;
  for (const auto& cell : cells) {
    const bool pi_ok = cell.pi == PiSource::oracle;
    const bool sev_ok = cell.severity == SeveritySource::unbiased;
    if (pi_ok || sev_ok) pass = pass && std::abs(cell.aipw_bias) < 0.02;
    if (!pi_ok) pass = pass && std::abs(cell.ipw_bias) > 0.05;
    if (!sev_ok) pass = pass && std::abs(cell.ml_bias) > 0.05;
    detail += fmt("[%s/%s AIPW %+.2f%% IPW %+.2f%% ML %+.2f%%] ", pi_ok ? "oracle" : "distorted",
                  sev_ok ? "unbiased" : "biased", 100 * cell.aipw_bias, 100 * cell.ipw_bias, 100 * cell.ml_bias);
  }
  return {pass, detail};
}

Outcome balance_collapse() {
  std::mt19937_64 gen(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_gap = 0.0, worst_aug = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t d = 1 + gen() % 3, n_pol = 5 + gen() % 60;
    std::vector<std::string> schema;
    for (std::size_t k = 0; k < d; ++k) schema.push_back("x" + std::to_string(k));
    std::vector<PolicyRecord> policies;
    std::vector<Claim> claims;
    for (std::size_t j = 0; j < n_pol; ++j) {
      std::vector<double> x;
      for (std::size_t k = 0; k < d; ++k) x.push_back(4.0 * u(gen) - 2.0);
      policies.push_back({"p" + std::to_string(j), 0.5 + u(gen), x, 0.0, 12.0});
      const int m = static_cast<int>(gen() % 4);
      for (int i = 0; i < m; ++i)
        claims.push_back({"c" + std::to_string(claims.size()), policies.back().policy_id, 12.0 * u(gen), 0.0,
                          std::exp(3.0 * u(gen) + 2.0 * u(gen) * x[0]), x});
    }
    if (claims.empty()) claims.push_back({"c0", "p0", 1.0, 0.0, 10.0, policies[0].covariates});
    const auto port = Portfolio::make(policies, claims, schema);
    std::vector<std::size_t> idx(claims.size());
    std::vector<double> raw, y;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      idx[i] = i;
      raw.push_back(0.02 + 0.98 * u(gen));
      y.push_back(claims[i].severity);
    }
    const auto pis = InclusionProbabilities::make(raw, ProbabilitySource::model);
    SeverityModel m;
    m.beta.push_back(4.0 * u(gen) - 2.0);
    for (std::size_t k = 0; k < d; ++k) m.beta.push_back(u(gen) - 0.5);
    m.sigma = 0.2 + u(gen);
    const auto cal = calibrate_wbp(m, port, idx, pis);
    const auto yhat = predict_claims(cal, port, idx);
    std::vector<double> lambda, pol_hat;
    for (const auto& p : port.policies()) {
      lambda.push_back(3.0 * u(gen));
      pol_hat.push_back(cal.predict_mean(p.covariates));
    }
    const auto ml = ml_reserve(lambda, pol_hat);
    const auto aipw = aipw_reserve(y, yhat, ml.point, pis);
    double total_y = 0.0;
    for (double v : y) total_y += v;
    worst_gap = std::max(worst_gap, std::abs(aipw.point - ml.point) / ml.point);
    worst_aug = std::max(worst_aug, std::abs(aipw.augmentation_term) / total_y);
  }
  return {worst_gap < 1e-10 && worst_aug < 1e-10,
          fmt("max |AIPW-ML|/ML %.2e, max |augmentation|/sum Y %.2e over 100 instances, tol 1e-10", worst_gap,
              worst_aug)};
}

Outcome cl_ipw_equivalence() {
  std::mt19937_64 gen(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  bool exact = true;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t m = 2 + gen() % 8;
    std::vector<double> incr(m);
    for (auto& v : incr) v = 0.05 + u(gen);
    std::vector<PolicyRecord> policies{{"p", 1.0, {}, 0.0, static_cast<double>(m)}};
    std::vector<Claim> claims;
    for (std::size_t k = 0; k < m; ++k) {
      const double scale = 10.0 + 1000.0 * u(gen);
      for (std::size_t d = 0; d + k < m; ++d) {
        // split each incremental cell over a few claims
        const int parts = 1 + static_cast<int>(gen() % 3);
        for (int s = 0; s < parts; ++s)
          claims.push_back({"c" + std::to_string(claims.size()), "p", k + 0.5, static_cast<double>(d),
                            scale * incr[d] / parts, {}});
      }
    }
    const auto port = Portfolio::make(policies, claims, {});
    const auto ctx = partition(port, static_cast<double>(m));
    const auto cl = chain_ladder(build_triangle(port, ctx, 1.0));
    const auto pis = cohort_probabilities(port, ctx, cl, 1.0);
    const auto ipw = ipw_reserve(severities(port, ctx.reported_idx), pis);
    worst = std::max(worst, std::abs(ipw.point - cl.estimate.point) / cl.estimate.point);
    for (std::size_t k = 0; k < m; ++k) exact = exact && cl.implied_pi[k] == 1.0 / cl.to_ultimate[k];
  }
  return {worst < 1e-10 && exact,
          fmt("max rel |IPW-CL| %.2e over 100 triangles, implied pi == 1/f %s, tol 1e-10", worst,
              exact ? "exactly" : "NOT exactly")};
}

Outcome credibility() {
  std::mt19937_64 gen(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int inst = 0; inst < 1000; ++inst) {
    const double lr = 1.0 + 1e5 * u(gen);
    const double pi = 0.01 + 0.99 * u(gen);
    const double expert = lr * (0.5 + 3.0 * u(gen));
    const double z = inst % 10 == 0 ? 0.0 : inst % 10 == 1 ? 1.0 : u(gen);
    const auto r = credibility_ultimate(lr / pi, expert, z, pi);
    worst = std::max(worst, std::abs(r.convex - r.rearranged) / std::abs(r.convex));
  }
  return {worst < 1e-10, fmt("max rel gap %.2e over 1000 inputs (200 with Z in {0, 1}), tol 1e-10", worst)};
}

Outcome conditional_law() {
  std::mt19937_64 gen(707);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_tv = 0.0, worst_mean = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const double q = 0.9 * u(gen), theta = 0.05 + 3.0 * u(gen), r = 0.3 + 5.0 * u(gen);
    const double xi = 0.3 + 1.7 * u(gen), p = 0.01 + 0.98 * u(gen);
    const long n = static_cast<long>(gen() % 6);
    const auto law = ibnr_conditional(CountFamily::zinb, q, theta, r, xi, p, n);
    // joint law of (reported, unreported) = (Bin(N, p), N - Bin(N, p)) with N ~ ZINB(q, theta xi, r)
    const long kmax = 3000;
    std::vector<double> w(kmax + 1);
    double total = 0.0;
    for (long k = 0; k <= kmax; ++k) {
      const double log_choose = std::lgamma(n + k + 1.0) - std::lgamma(n + 1.0) - std::lgamma(k + 1.0);
      w[k] = zinb_pmf(n + k, q, theta * xi, r) * std::exp(log_choose + n * std::log(p) + k * std::log1p(-p));
      total += w[k];
    }
    double tv = 0.0, mean = 0.0;
    for (long k = 0; k <= kmax; ++k) {
      const double oracle = w[k] / total;
      tv += std::abs(law.pmf(k) - oracle);
      mean += k * oracle;
    }
    worst_tv = std::max(worst_tv, 0.5 * tv);
    worst_mean = std::max(worst_mean, std::abs(expected_ibnr_count(law) - mean) / std::max(1.0, mean));
  }
  return {worst_tv < 1e-8 && worst_mean < 1e-8,
          fmt("max TV %.2e, max mean gap %.2e over 50 parameter sets, tol 1e-8", worst_tv, worst_mean)};
}

Outcome geometric_sums() {
  struct Case {
    std::size_t m;
    double pi;
  };
  const std::size_t draws = 100000;
  bool pass = true;
  std::string detail;
  for (const auto& cs : {Case{1, 0.5}, Case{5, 0.3}, Case{12, 0.7}}) {
    const std::vector<std::size_t> src(cs.m, 0);
    const auto pis = InclusionProbabilities::make(std::vector<double>(cs.m, cs.pi), ProbabilitySource::fixed);
    std::vector<long> sums(draws);
    double z_total = 0.0;
    for (std::size_t r = 0; r < draws; ++r) {
      const auto pseudo = geometric_pseudo_population(src, pis, 808, r);
      double s = 0.0;
      for (double w : pseudo.weight) s += w;
      sums[r] = static_cast<long>(s);
      z_total += pseudo.weight[0];
    }
    // NegBinom(m, pi) on failures, cells merged until the expected count reaches 5
    const auto m = static_cast<double>(cs.m);
    const long kmax = *std::max_element(sums.begin(), sums.end());
    std::vector<double> observed(kmax + 2, 0.0);
    for (long s : sums) observed[s] += 1.0;
    double chi2 = 0.0, cum_p = 0.0, cell_obs = 0.0, cell_exp = 0.0;
    int cells = 0;
    for (long k = 0; k <= kmax; ++k) {
      const double pk = std::exp(std::lgamma(k + m) - std::lgamma(m) - std::lgamma(k + 1.0) + m * std::log(cs.pi) +
                                 k * std::log1p(-cs.pi));
      cum_p += pk;
      cell_obs += observed[k];
      cell_exp += pk * draws;
      if (cell_exp >= 5.0 && (1.0 - cum_p) * draws >= 5.0) {
        chi2 += (cell_obs - cell_exp) * (cell_obs - cell_exp) / cell_exp;
        ++cells;
        cell_obs = cell_exp = 0.0;
      }
    }
    cell_exp += (1.0 - cum_p) * draws;
    chi2 += (cell_obs - cell_exp) * (cell_obs - cell_exp) / cell_exp;
    ++cells;
    const double p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(cells - 1), chi2));
    const double ez = z_total / draws, target = (1.0 - cs.pi) / cs.pi;
    const double rel = (ez - target) / target;
    pass = pass && p_value > 0.01 && std::abs(rel) < 0.02;
    detail += fmt("m=%zu pi=%.1f: GOF p %.3f, E[Z] rel %+.2f%%; ", cs.m, cs.pi, p_value, 100 * rel);
  }
  return {pass, detail + "tol p > 0.01, 2%"};
}

// Pooled unreported severities from independent replicates, sorted.
std::vector<double> unreported_law_sample(const SimConfig& base, double tau) {
  auto c = base;
  c.n_policies = 400000;
  c.seed = base.seed + 7777;
  const auto policies = draw_policies(c);
  std::vector<double> out;
  for (std::uint64_t r = 1; out.size() < 1000000; ++r) {
    for (const auto& cl : draw_claims(c, policies, r))
      if (cl.accident_time <= tau && cl.report_time() > tau) out.push_back(cl.severity);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double ks_to_sample(const WeightedEcdf& f, const std::vector<double>& sorted) {
  const double n = static_cast<double>(sorted.size());
  auto g = [&](double y) { return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), y) - sorted.begin()) / n; };
  double ks = 0.0;
  for (double y : f.values()) ks = std::max(ks, std::abs(f(y) - g(y)));
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (i + 1 == sorted.size() || sorted[i + 1] != sorted[i]) ks = std::max(ks, std::abs(f(sorted[i]) - (i + 1) / n));
  return ks;
}

Outcome weighted_ecdf_consistency() {
  const double tau = 24.0;
  const auto base = default_sim(1, 909);
  const auto oracle = unreported_law_sample(base, tau);
  bool pass = true;
  std::string detail;
  double prev = 2.0;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    std::vector<double> ks_w, ks_u;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto c = base;
      c.seed = 1000 * seed + n;
      c.n_policies = n * 8;
      const auto p = simulate(c);
      const auto ctx = partition(p, tau);
      if (ctx.reported_idx.size() < n) throw std::runtime_error("portfolio too small for the requested sample");
      std::vector<double> y, odds, ones;
      for (std::size_t k = 0; k < n; ++k) {
        const auto& cl = p.claims()[ctx.reported_idx[k]];
        y.push_back(cl.severity);
        odds.push_back(odds_ratio(std::max(default_clamp_floor, true_inclusion_probability(c, cl, tau))));
        ones.push_back(1.0);
      }
      ks_w.push_back(ks_to_sample(weighted_ecdf(odds, y), oracle));
      ks_u.push_back(ks_to_sample(weighted_ecdf(ones, y), oracle));
    }
    const double mw = median(ks_w), mu = median(ks_u);
    pass = pass && mw < prev && mw < mu;
    prev = mw;
    detail += fmt("n=%zu KS weighted %.4f unweighted %.4f; ", n, mw, mu);
  }
  return {pass, detail + "medians over 20 seeds"};
}

Outcome gradients() {
  std::mt19937_64 gen(1010);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto check = [&](const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>& f, Eigen::VectorXd centre,
                   double spread) {
    double worst = 0.0;
    for (int pt = 0; pt < 20; ++pt) {
      Eigen::VectorXd x = centre;
      for (Eigen::Index k = 0; k < x.size(); ++k) x[k] += spread * u(gen);
      Eigen::VectorXd g;
      f(x, &g);
      Eigen::VectorXd fd(x.size());
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double h = 1e-5 * std::max(1.0, std::abs(x[k]));
        Eigen::VectorXd a = x, b = x;
        a[k] += h;
        b[k] -= h;
        fd[k] = (f(a, nullptr) - f(b, nullptr)) / (2.0 * h);
      }
      worst = std::max(worst, (g - fd).lpNorm<Eigen::Infinity>() / std::max(1.0, g.lpNorm<Eigen::Infinity>()));
    }
    return worst;
  };

  const auto c = default_sim(2000, 1011);
  const auto p = simulate(c);
  const auto ctx = partition(p, 24.0);
  const auto spec = make_feature_spec({0, 1}, SeverityEffect::linear_log, TimeEffect::binned,
                                      severities(p, ctx.reported_idx), {}, 4);
  std::vector<double> times;
  for (auto i : ctx.reported_idx) times.push_back(p.claims()[i].accident_time);
  const auto spec_t = make_feature_spec({0, 1}, SeverityEffect::linear_log, TimeEffect::binned, {}, times, 3);
  const auto design = make_delay_design(p, ctx, spec_t);
  const auto& edges = c.delay.bin_edges;
  Eigen::VectorXd hz(static_cast<Eigen::Index>(edges.size() + spec_t.dimension()));
  hz.setZero();
  for (std::size_t k = 0; k < edges.size(); ++k) hz[static_cast<Eigen::Index>(k)] = std::log(c.delay.rates[k]);
  const double hazard = check(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return truncated_log_likelihood(design, edges, x, g); }, hz,
      0.5);

  std::vector<double> pj(p.policies().size());
  for (std::size_t j = 0; j < pj.size(); ++j) pj[j] = 0.3 + 0.6 * (j % 7) / 7.0;
  const auto freq = make_frequency_data(p, ctx, pj);
  Eigen::VectorXd zfull(8);
  zfull << -1.0, 0.5, 0.0, 0.3, -1.5, 0.4, 0.2, std::log(2.0);
  const double zinb = check([&](const Eigen::VectorXd& x,
                                Eigen::VectorXd* g) { return zinb_log_likelihood(freq, CountFamily::zinb, x, g); },
                            zfull, 0.5);

  const auto n = static_cast<Eigen::Index>(ctx.reported_idx.size());
  Eigen::MatrixXd X(n, 3);
  std::vector<double> logy, w;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& cl = p.claims()[ctx.reported_idx[static_cast<std::size_t>(i)]];
    X.row(i) << 1.0, cl.covariates[0], cl.covariates[1];
    logy.push_back(std::log(cl.severity));
    w.push_back(odds_ratio(std::max(0.01, true_inclusion_probability(c, cl, 24.0))));
  }
  Eigen::VectorXd lp(4);
  lp << 1.0, 0.5, -0.3, 0.0;
  const double lognormal = check(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return lognormal_log_likelihood(X, logy, w, x, g); }, lp, 0.5);

  const double worst = std::max({hazard, zinb, lognormal});
  return {worst < 1e-5, fmt("max rel error: hazard %.2e, zinb %.2e, lognormal %.2e at 20 points each, tol 1e-5",
                            hazard, zinb, lognormal)};
}

Outcome directional_backtest() {
  std::vector<double> grid;
  for (int t = 25; t <= 36; ++t) grid.push_back(t);
  const std::vector<EstimatorKind> est{EstimatorKind::aipw, EstimatorKind::ml, EstimatorKind::ml_wbp};
  PipelineOptions opts;
  opts.count_severity = CountSeverity::integrated;
  std::vector<double> aipw, ml, wbp;
  int aipw_wins = 0, wbp_wins = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = simulate(default_sim(10000, 1200 + seed));
    const auto report = backtest(p, grid, est, RefitPolicy::every_date, opts);
    double a = NAN, m = NAN, b = NAN;
    for (const auto& s : report.summary) {
      const double v = s.metrics.mape.value_or(NAN);
      if (s.estimator == "AIPW") a = v;
      if (s.estimator == "ML") m = v;
      if (s.estimator == "ML-wBP") b = v;
    }
    aipw.push_back(a);
    ml.push_back(m);
    wbp.push_back(b);
    aipw_wins += a < m;
    wbp_wins += b < m;
  }
  const double ma = median(aipw), mm = median(ml), mb = median(wbp);
  return {ma < mm && mb < mm,
          fmt("median MAPE over 20 seeds x 12 dates: AIPW %.1f%%, ML %.1f%%, ML-wBP %.1f%% (AIPW < ML in %d/20, "
              "ML-wBP < ML in %d/20)",
              100 * ma, 100 * mm, 100 * mb, aipw_wins, wbp_wins)};
}

Outcome bootstrap_coverage() {
  const auto c = default_sim(10000, 1313);
  const double tau = 24.0;
  const auto policies = draw_policies(c);
  const std::size_t outer = 500;
  std::size_t covered = 0;
  for (std::size_t r = 0; r < outer; ++r) {
    const auto claims = draw_claims(c, policies, r + 1);
    std::vector<double> y, pi;
    double truth = 0.0;
    for (const auto& cl : claims) {
      if (cl.accident_time > tau) continue;
      if (cl.report_time() > tau) {
        truth += cl.severity;
        continue;
      }
      y.push_back(cl.severity);
      pi.push_back(true_inclusion_probability(c, policies[cl.policy].covariates, cl.severity, cl.accident_time, tau));
    }
    const auto boot = bootstrap_reserve(y, InclusionProbabilities::make(pi, ProbabilitySource::oracle), 1000, r + 1);
    covered += truth >= boot.interval.lo && truth <= boot.interval.hi;
  }
  const double rate = static_cast<double>(covered) / outer;
  return {std::abs(rate - 0.9) <= 0.04, fmt("coverage %.1f%% over %zu replicates (B = 1000), target 90%% +/- 4%%",
                                            100 * rate, outer)};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / ("ibnr_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::size_t files = 0;
  bool pass = true;
  for (const char* command : {"simulate", "fit", "reserve", "backtest", "validate"}) {
    std::vector<fs::path> dirs{root / "a" / command, root / "b" / command};
    for (const auto& dir : dirs) {
      const std::string cmd = std::string(IBNR_CLI_PATH) + " " + command + " --config " + IBNR_EXAMPLE_CONFIG +
                              " --out " + dir.string() + " > /dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, fmt("%s run failed", command)};
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      ++files;
      const auto other = dirs[1] / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
        pass = false;
        std::fprintf(stderr, "differs: %s\n", entry.path().c_str());
      }
    }
  }
  fs::remove_all(root);
  return {pass, fmt("%zu output files of simulate, fit, reserve, backtest and validate compared byte for byte", files)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> checks{
      {"ipw-unbiasedness", ipw_unbiased},
      {"odds-weighting-identity", identity},
      {"double-robustness", robustness},
      {"balance-collapses-aipw", balance_collapse},
      {"chain-ladder-ipw-equivalence", cl_ipw_equivalence},
      {"credibility-identity", credibility},
      {"conditional-ibnr-law", conditional_law},
      {"geometric-negbinom", geometric_sums},
      {"weighted-ecdf-consistency", weighted_ecdf_consistency},
      {"likelihood-gradients", gradients},
      {"directional-backtest", directional_backtest},
      {"bootstrap-coverage", bootstrap_coverage},
      {"determinism", determinism},
  };
  // optional argument: run only the checks whose 1-based numbers are listed
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const int number = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %-30s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", number, checks[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
