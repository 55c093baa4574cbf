#include "ibnr/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>

#include "newton.hpp"

namespace ibnr {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double prob) {
  // linear interpolation between order statistics (R type 7)
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> interior_quantiles(std::span<const double> values, std::size_t bins) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  if (sorted.empty() || bins < 2) return cuts;
  for (std::size_t k = 1; k < bins; ++k) {
    const double q = quantile_sorted(sorted, static_cast<double>(k) / static_cast<double>(bins));
    if (cuts.empty() || q > cuts.back()) cuts.push_back(q);
  }
  return cuts;
}

std::size_t bucket(std::span<const double> cuts, double v) {
  return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
}

// g(x) = -log(1 - exp(-x)) and its first two derivatives.
struct TruncationTerm {
  double value, d1, d2;
};

TruncationTerm truncation_term(double x) {
  const double em = std::expm1(x);
  const double t = std::isfinite(em) ? 1.0 / em : 0.0;
  return {-std::log(-std::expm1(-x)), -t, t * (1.0 + t)};
}

}  // namespace

const char* to_string(SeverityEffect effect) noexcept {
  switch (effect) {
    case SeverityEffect::none: return "none";
    case SeverityEffect::linear_log: return "linear";
    case SeverityEffect::binned: return "binned";
  }
  return "unknown";
}

const char* to_string(TimeEffect effect) noexcept {
  return effect == TimeEffect::binned ? "binned" : "none";
}

SeverityEffect parse_severity_effect(const std::string& name) {
  if (name == "none") return SeverityEffect::none;
  if (name == "linear") return SeverityEffect::linear_log;
  if (name == "binned") return SeverityEffect::binned;
  throw InvalidArgument("unknown severity effect '" + name + "' (none|linear|binned)");
}

TimeEffect parse_time_effect(const std::string& name) {
  if (name == "none") return TimeEffect::none;
  if (name == "binned") return TimeEffect::binned;
  throw InvalidArgument("unknown time effect '" + name + "' (none|binned)");
}

std::size_t DelayFeatureSpec::dimension() const noexcept {
  std::size_t d = covariate_columns.size();
  if (severity_effect == SeverityEffect::linear_log) d += 1;
  if (severity_effect == SeverityEffect::binned) d += severity_cuts.size();
  if (time_effect == TimeEffect::binned) d += time_cuts.size();
  return d;
}

void DelayFeatureSpec::fill_row(std::span<const double> covariates, double severity, double accident_time,
                                std::span<double> out) const {
  std::size_t k = 0;
  for (auto c : covariate_columns) {
    if (c >= covariates.size()) throw InvalidArgument("delay feature column out of range");
    out[k++] = covariates[c];
  }
  if (severity_effect == SeverityEffect::linear_log) {
    out[k++] = std::log(severity);
  } else if (severity_effect == SeverityEffect::binned) {
    const auto b = bucket(severity_cuts, std::log(severity));
    for (std::size_t j = 1; j <= severity_cuts.size(); ++j) out[k++] = b == j ? 1.0 : 0.0;
  }
  if (time_effect == TimeEffect::binned) {
    const auto b = bucket(time_cuts, accident_time);
    for (std::size_t j = 1; j <= time_cuts.size(); ++j) out[k++] = b == j ? 1.0 : 0.0;
  }
}

std::vector<double> DelayFeatureSpec::row(std::span<const double> covariates, double severity,
                                          double accident_time) const {
  std::vector<double> out(dimension());
  fill_row(covariates, severity, accident_time, out);
  return out;
}

DelayFeatureSpec make_feature_spec(std::vector<std::size_t> covariate_columns, SeverityEffect severity_effect,
                                   TimeEffect time_effect, std::span<const double> severities,
                                   std::span<const double> accident_times, std::size_t effect_bins) {
  DelayFeatureSpec spec;
  spec.covariate_columns = std::move(covariate_columns);
  spec.severity_effect = severity_effect;
  spec.time_effect = time_effect;
  if (severity_effect == SeverityEffect::binned) {
    std::vector<double> logs;
    logs.reserve(severities.size());
    for (double y : severities) logs.push_back(std::log(y));
    spec.severity_cuts = interior_quantiles(logs, effect_bins);
  }
  if (time_effect == TimeEffect::binned) spec.time_cuts = interior_quantiles(accident_times, effect_bins);
  return spec;
}

DelayDesign make_delay_design(const Portfolio& portfolio, const ValuationContext& context,
                              const DelayFeatureSpec& spec) {
  DelayDesign d;
  d.spec = spec;
  const auto n = context.reported_idx.size();
  d.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.dimension()));
  d.delays.reserve(n);
  d.truncation.reserve(n);
  std::vector<double> row(spec.dimension());
  std::vector<double> ys;
  ys.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& c = portfolio.claims()[context.reported_idx[r]];
    spec.fill_row(c.covariates, c.severity, c.accident_time, row);
    for (std::size_t k = 0; k < row.size(); ++k) d.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = row[k];
    d.delays.push_back(c.report_delay);
    d.truncation.push_back(context.tau - c.accident_time);
    ys.push_back(c.severity);
  }
  if (!ys.empty()) {
    std::sort(ys.begin(), ys.end());
    d.severity_plugin = quantile_sorted(ys, 0.5);
  }
  validate_design(d);
  return d;
}

void validate_design(const DelayDesign& design) {
  const auto n = design.delays.size();
  if (design.truncation.size() != n || static_cast<std::size_t>(design.features.rows()) != n)
    throw InvalidArgument("delay design: mismatched row counts");
  if (static_cast<std::size_t>(design.features.cols()) != design.spec.dimension())
    throw InvalidArgument("delay design: feature width does not match spec");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(design.delays[i] >= 0.0) || !(design.truncation[i] >= design.delays[i]))
      throw InvalidArgument("delay design: truncation bound below observed delay at row " + std::to_string(i));
  }
}

double HazardModel::linear_predictor(std::span<const double> features) const {
  if (features.size() != beta.size()) throw InvalidArgument("hazard feature row has wrong length");
  double eta = 0.0;
  for (std::size_t k = 0; k < beta.size(); ++k) eta += beta[k] * features[k];
  return eta;
}

StepHazard HazardModel::baseline() const {
  std::vector<double> rates;
  rates.reserve(log_baseline.size());
  for (double a : log_baseline) rates.push_back(std::exp(a));
  return StepHazard(bin_edges, std::move(rates));
}

double HazardModel::cumulative_hazard(std::span<const double> features, double elapsed) const {
  return std::exp(linear_predictor(features)) * baseline().cumulative(elapsed);
}

std::vector<double> quantile_bin_edges(std::span<const double> delays, std::size_t bins) {
  if (bins == 0) throw InvalidArgument("at least one baseline bin is required");
  std::vector<double> edges{0.0};
  for (double q : interior_quantiles(delays, bins)) {
    if (q > edges.back()) edges.push_back(q);
  }
  return edges;
}

double truncated_log_likelihood(const DelayDesign& design, std::span<const double> bin_edges,
                                const Eigen::VectorXd& params, Eigen::VectorXd* gradient,
                                Eigen::MatrixXd* hessian) {
  const auto K = static_cast<Eigen::Index>(bin_edges.size());
  const auto P = design.features.cols();
  if (params.size() != K + P) throw InvalidArgument("hazard parameter vector has wrong length");
  const StepHazard grid(std::vector<double>(bin_edges.begin(), bin_edges.end()),
                        std::vector<double>(static_cast<std::size_t>(K), 1.0));
  Eigen::VectorXd base(K);
  for (Eigen::Index k = 0; k < K; ++k) base[k] = std::exp(params[k]);
  if (gradient) gradient->setZero(K + P);
  if (hessian) hessian->setZero(K + P, K + P);

  std::vector<double> ou(static_cast<std::size_t>(K)), oc(static_cast<std::size_t>(K));
  Eigen::VectorXd lu(K), lc(K), a(K), v(K + P);
  double total = 0.0;
  const auto n = static_cast<Eigen::Index>(design.delays.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto z = design.features.row(i);
    const double eta = P > 0 ? z.dot(params.tail(P)) : 0.0;
    const double scale = std::exp(eta);
    const double u = design.delays[static_cast<std::size_t>(i)];
    const double c = design.truncation[static_cast<std::size_t>(i)];
    grid.overlaps(u, ou);
    grid.overlaps(c, oc);
    for (Eigen::Index k = 0; k < K; ++k) {
      lu[k] = scale * base[k] * ou[static_cast<std::size_t>(k)];
      lc[k] = scale * base[k] * oc[static_cast<std::size_t>(k)];
    }
    const double Lu = lu.sum();
    const double Lc = lc.sum();
    const auto b = static_cast<Eigen::Index>(grid.bin_of(u));
    const auto trunc = truncation_term(Lc);
    total += params[b] + eta - Lu + trunc.value;
    if (!gradient && !hessian) continue;
    a = -lu + trunc.d1 * lc;
    const double A = a.sum();
    if (gradient) {
      gradient->head(K) += a;
      (*gradient)[b] += 1.0;
      if (P > 0) gradient->tail(P) += (1.0 + A) * z.transpose();
    }
    if (hessian) {
      auto& H = *hessian;
      H.topLeftCorner(K, K).diagonal() += a;
      if (P > 0) {
        H.topRightCorner(K, P) += a * z;
        H.bottomLeftCorner(P, K) += z.transpose() * a.transpose();
        H.bottomRightCorner(P, P) += A * z.transpose() * z;
        v.tail(P) = Lc * z.transpose();
      }
      v.head(K) = lc;
      H += trunc.d2 * v * v.transpose();
    }
  }
  return total;
}

HazardModel fit_hazard(const DelayDesign& design, const HazardFitOptions& options) {
  validate_design(design);
  const auto n = design.delays.size();
  if (n == 0) throw InvalidArgument("fit_hazard: no reported claims");
  std::vector<double> edges = options.bin_edges.empty() ? quantile_bin_edges(design.delays, options.bins)
                                                        : options.bin_edges;
  check_bin_edges(edges);
  const auto K = static_cast<Eigen::Index>(edges.size());
  const auto P = design.features.cols();

  // occurrence / exposure start, ignoring truncation
  const StepHazard grid(edges, std::vector<double>(edges.size(), 1.0));
  std::vector<double> events(edges.size(), 0.0), exposure(edges.size(), 0.0), o(edges.size());
  for (std::size_t i = 0; i < n; ++i) {
    events[grid.bin_of(design.delays[i])] += 1.0;
    grid.overlaps(design.delays[i], o);
    for (std::size_t k = 0; k < o.size(); ++k) exposure[k] += o[k];
  }
  FitDiagnostics diag;
  double penalty = options.ridge_penalty;
  Eigen::VectorXd start = Eigen::VectorXd::Zero(K + P);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    if (events[kk] == 0.0) {
      if (penalty <= 0.0) penalty = options.fallback_ridge_penalty;
      diag.ridge_applied = true;
      diag.warnings.push_back("baseline bin " + std::to_string(kk) + " has no events; ridge penalty applied");
    }
    start[k] = std::log((events[kk] + 0.5) / std::max(exposure[kk], 1e-12));
  }
  if (penalty > 0.0) diag.ridge_applied = true;

  auto objective = [&](const Eigen::VectorXd& p, Eigen::VectorXd* g, Eigen::MatrixXd* h) -> double {
    double value = truncated_log_likelihood(design, edges, p, g, h);
    if (penalty > 0.0) {
      const Eigen::VectorXd d = p - start;
      value -= 0.5 * penalty * d.squaredNorm();
      if (g) *g -= penalty * d;
      if (h) h->diagonal().array() -= penalty;
    }
    return value;
  };

  detail::NewtonOptions nopts{options.hessian_ridge, options.max_iterations, options.gradient_tolerance};
  auto res = detail::newton_maximize(objective, start, nopts);
  diag.converged = res.diagnostics.converged;
  diag.iterations = res.diagnostics.iterations;
  diag.gradient_norm = res.diagnostics.gradient_norm;
  diag.log_likelihood = res.value;
  if (!diag.converged) throw ConvergenceFailure("fit_hazard: gradient tolerance not reached", diag);

  HazardModel model;
  model.bin_edges = edges;
  model.log_baseline.assign(res.x.data(), res.x.data() + K);
  model.beta.assign(res.x.data() + K, res.x.data() + K + P);
  model.spec = design.spec;
  model.severity_plugin = design.severity_plugin;
  model.diagnostics = diag;
  model.standard_errors = detail::standard_errors(res.hessian);
  return model;
}

double inclusion_probability(const HazardModel& model, std::span<const double> features, double elapsed) {
  if (!(elapsed >= 0.0)) throw InvalidArgument("inclusion_probability: elapsed must be >= 0");
  return -std::expm1(-model.cumulative_hazard(features, elapsed));
}

double claim_inclusion_probability(const HazardModel& model, const Claim& claim, double tau) {
  const auto row = model.spec.row(claim.covariates, claim.severity, claim.accident_time);
  return inclusion_probability(model, row, tau - claim.accident_time);
}

const std::vector<std::pair<double, double>>& standard_normal_nodes() {
  // Golub-Welsch for the probabilists' Hermite weight
  static const auto nodes = [] {
    constexpr int n = 16;
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    std::vector<std::pair<double, double>> out;
    for (int k = 0; k < n; ++k) out.emplace_back(es.eigenvalues()[k], es.eigenvectors()(0, k) * es.eigenvectors()(0, k));
    return out;
  }();
  return nodes;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// (severity, probability) pairs standing in for the severity term
std::vector<std::pair<double, double>> severity_nodes(const HazardModel& model, const LogSeverityLaw* law) {
  if (!law || model.spec.severity_effect == SeverityEffect::none) return {{model.severity_plugin, 1.0}};
  if (!(law->sd >= 0.0)) throw InvalidArgument("log-severity law: sd must be >= 0");
  if (law->sd == 0.0) return {{std::exp(law->mean), 1.0}};
  std::vector<std::pair<double, double>> out;
  if (model.spec.severity_effect == SeverityEffect::linear_log) {
    for (const auto& [z, w] : standard_normal_nodes()) out.emplace_back(std::exp(law->mean + law->sd * z), w);
    return out;
  }
  const auto& cuts = model.spec.severity_cuts;
  double prev = 0.0;
  for (std::size_t b = 0; b <= cuts.size(); ++b) {
    const double upper = b < cuts.size() ? normal_cdf((cuts[b] - law->mean) / law->sd) : 1.0;
    double rep;
    if (cuts.empty()) rep = law->mean;
    else if (b == 0) rep = cuts.front() - 1.0;
    else if (b == cuts.size()) rep = cuts.back() + 1.0;
    else rep = 0.5 * (cuts[b - 1] + cuts[b]);
    if (upper > prev) out.emplace_back(std::exp(rep), upper - prev);
    prev = upper;
  }
  return out;
}

}  // namespace

double average_inclusion_probability(const HazardModel& model, std::span<const double> covariates, double tau,
                                     double window_start, double window_end, const LogSeverityLaw* law) {
  const double lo = window_start;
  const double hi = std::min(window_end, tau);
  if (!(hi > lo)) throw InvalidArgument("average_inclusion_probability: empty integration range");
  const StepHazard base = model.baseline();
  // breakpoints: kinks where tau - t crosses a bin edge, jumps at time cuts
  std::vector<double> breaks{lo, hi};
  for (double e : model.bin_edges) {
    const double t = tau - e;
    if (t > lo && t < hi) breaks.push_back(t);
  }
  if (model.spec.time_effect == TimeEffect::binned) {
    for (double t : model.spec.time_cuts)
      if (t > lo && t < hi) breaks.push_back(t);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const auto nodes = severity_nodes(model, law);
  std::vector<double> row(model.spec.dimension());
  std::vector<double> scale(nodes.size());
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    // the linear predictor is constant inside a piece
    const double mid = 0.5 * (breaks[s] + breaks[s + 1]);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      model.spec.fill_row(covariates, nodes[k].first, mid, row);
      scale[k] = std::exp(model.linear_predictor(row));
    }
    auto pi_at = [&](double t) {
      const double cum = base.cumulative(tau - t);
      double v = 0.0;
      for (std::size_t k = 0; k < nodes.size(); ++k) v -= nodes[k].second * std::expm1(-scale[k] * cum);
      return v;
    };
    total += boost::math::quadrature::gauss<double, 64>::integrate(pi_at, breaks[s], breaks[s + 1]);
  }
  return std::clamp(total / (hi - lo), 0.0, 1.0);
}

InclusionProbabilities model_inclusion_probabilities(const HazardModel& model, const Portfolio& portfolio,
                                                     const ValuationContext& context, double clamp_floor) {
  std::vector<double> raw;
  raw.reserve(context.reported_idx.size());
  for (auto i : context.reported_idx) raw.push_back(claim_inclusion_probability(model, portfolio.claims()[i], context.tau));
  return InclusionProbabilities::make(std::move(raw), ProbabilitySource::model, clamp_floor);
}

}  // namespace ibnr
