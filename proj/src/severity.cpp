#include "ibnr/severity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ibnr {

const char* to_string(SeverityMode mode) noexcept {
  switch (mode) {
    case SeverityMode::plain: return "plain";
    case SeverityMode::weighted: return "weighted";
    case SeverityMode::plain_wbp: return "plain+wbp";
  }
  return "unknown";
}

double SeverityModel::predict_mean(std::span<const double> covariates) const {
  if (covariates.size() + 1 != beta.size()) throw InvalidArgument("predict_mean: covariate length does not match model");
  double nu = beta[0];
  for (std::size_t k = 0; k < covariates.size(); ++k) nu += beta[k + 1] * covariates[k];
  return wbp_b * std::exp(nu + 0.5 * sigma * sigma);
}

SeverityModel fit_lognormal(const Eigen::MatrixXd& design, std::span<const double> log_y,
                            std::span<const double> weights, const SeverityFitOptions& options) {
  const auto n = design.rows();
  const auto p = design.cols();
  if (static_cast<std::size_t>(n) != log_y.size()) throw InvalidArgument("fit_lognormal: response length mismatch");
  if (!weights.empty() && weights.size() != log_y.size())
    throw InvalidArgument("fit_lognormal: weight length mismatch");
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) throw InvalidArgument("fit_lognormal: weights must be finite and >= 0");
    w[static_cast<Eigen::Index>(i)] = weights[i];
  }
  const double total = w.sum();
  if (!(total > 0.0)) throw InvalidArgument("fit_lognormal: total weight is zero");
  const Eigen::Index positive = (w.array() > 0.0).count();
  if (positive < p + 2) throw InvalidArgument("fit_lognormal: need at least p+2 weighted observations");

  const Eigen::Map<const Eigen::VectorXd> y(log_y.data(), n);
  const Eigen::VectorXd sw = w.array().sqrt();
  const Eigen::MatrixXd xs = sw.asDiagonal() * design;
  const Eigen::VectorXd ys = sw.cwiseProduct(y);

  SeverityModel model;
  model.mode = weights.empty() ? SeverityMode::plain : SeverityMode::weighted;
  Eigen::VectorXd beta;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  if (options.ridge > 0.0 || qr.rank() < p) {
    double ridge = options.ridge;
    if (qr.rank() < p) {
      if (!options.allow_ridge_fallback && ridge <= 0.0)
        throw SingularDesign("fit_lognormal: design matrix is rank deficient");
      if (ridge <= 0.0) ridge = options.fallback_ridge * std::max(1.0, total);
      model.diagnostics.ridge_applied = true;
      model.diagnostics.warnings.push_back("rank-deficient severity design; ridge applied");
    }
    Eigen::MatrixXd xtx = xs.transpose() * xs;
    xtx.diagonal().array() += ridge;
    beta = xtx.ldlt().solve(xs.transpose() * ys);
  } else {
    beta = qr.solve(ys);
  }
  const Eigen::VectorXd resid = y - design * beta;
  const double rss = (w.array() * resid.array().square()).sum();
  model.beta.assign(beta.data(), beta.data() + p);
  model.sigma = std::sqrt(rss / total);
  model.diagnostics.converged = true;
  return model;
}

SeverityModel fit_lognormal(const Portfolio& portfolio, std::span<const std::size_t> idx,
                            std::span<const double> weights, const SeverityFitOptions& options) {
  const auto d = portfolio.covariate_schema().size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(d + 1));
  std::vector<double> ly(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& c = portfolio.claims()[idx[r]];
    const auto rr = static_cast<Eigen::Index>(r);
    x(rr, 0) = 1.0;
    for (std::size_t k = 0; k < d; ++k) x(rr, static_cast<Eigen::Index>(k + 1)) = c.covariates[k];
    ly[r] = std::log(c.severity);
  }
  return fit_lognormal(x, ly, weights, options);
}

double lognormal_log_likelihood(const Eigen::MatrixXd& design, std::span<const double> log_y,
                                std::span<const double> weights, const Eigen::VectorXd& params,
                                Eigen::VectorXd* gradient) {
  const auto n = design.rows();
  const auto p = design.cols();
  if (params.size() != p + 1) throw InvalidArgument("lognormal_log_likelihood: parameter vector has wrong length");
  const double log_sigma = params[p];
  const double inv_var = std::exp(-2.0 * log_sigma);
  const Eigen::VectorXd mu = design * params.head(p);
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double total = 0.0;
  if (gradient) gradient->setZero(p + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const double w = weights.empty() ? 1.0 : weights[ii];
    const double r = log_y[ii] - mu[i];
    total += w * (-log_sigma - half_log_2pi - log_y[ii] - 0.5 * r * r * inv_var);
    if (gradient) {
      gradient->head(p) += (w * r * inv_var) * design.row(i).transpose();
      (*gradient)[p] += w * (-1.0 + r * r * inv_var);
    }
  }
  return total;
}

CappedWeights cap_weights(std::span<const double> weights, double quantile) {
  if (!(quantile > 0.0 && quantile <= 1.0)) throw InvalidArgument("cap_weights: quantile must lie in (0, 1]");
  CappedWeights out;
  out.weights.assign(weights.begin(), weights.end());
  if (weights.empty()) return out;
  std::vector<double> sorted = out.weights;
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * quantile;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  out.cap = sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  for (auto& w : out.weights) {
    if (w > out.cap) {
      w = out.cap;
      ++out.capped;
    }
  }
  return out;
}

BalanceTarget parse_balance_target(const std::string& name) {
  if (name == "odds") return BalanceTarget::odds;
  if (name == "inverse") return BalanceTarget::inverse;
  if (name == "unit") return BalanceTarget::unit;
  throw InvalidArgument("unknown balance target '" + name + "' (odds|inverse|unit)");
}

std::vector<double> predict_claims(const SeverityModel& model, const Portfolio& portfolio,
                                   std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(model.predict_mean(portfolio.claims()[i].covariates));
  return out;
}

SeverityModel calibrate_wbp(const SeverityModel& model, const Portfolio& portfolio,
                            std::span<const std::size_t> idx, const InclusionProbabilities& pis,
                            BalanceTarget target) {
  if (pis.size() != idx.size()) throw InvalidArgument("calibrate_wbp: probabilities do not match claims");
  SeverityModel base = model;
  base.wbp_b = 1.0;
  double num = 0.0, den = 0.0;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& c = portfolio.claims()[idx[r]];
    const double w = target == BalanceTarget::odds ? odds_ratio(pis[r])
                     : target == BalanceTarget::inverse ? 1.0 / pis[r]
                                                        : 1.0;
    num += w * c.severity;
    den += w * base.predict_mean(c.covariates);
  }
  SeverityModel out = base;
  out.mode = SeverityMode::plain_wbp;
  if (den == 0.0 && num == 0.0) {
    out.diagnostics.warnings.push_back("calibration undefined: no unreported mass, b set to 1");
    return out;
  }
  if (!(den > 0.0)) throw InvalidArgument("calibrate_wbp: weighted prediction total must be > 0");
  out.wbp_b = num / den;
  return out;
}

}  // namespace ibnr
