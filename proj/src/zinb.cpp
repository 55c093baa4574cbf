#include "ibnr/zinb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "ibnr/csv_io.hpp"
#include "newton.hpp"

namespace ibnr {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_zinb_args(double q, double theta, double r) {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("zinb: q must lie in [0, 1]");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidArgument("zinb: theta must be > 0");
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("zinb: r must be > 0");
}

double dot(const Eigen::MatrixXd& m, Eigen::Index row, std::span<const double> beta) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < m.cols(); ++k) s += m(row, k) * beta[static_cast<std::size_t>(k)];
  return s;
}

double row_dot(std::span<const double> row, const std::vector<double>& beta) {
  if (row.size() != beta.size()) throw InvalidArgument("design row length does not match coefficients");
  double s = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) s += row[k] * beta[k];
  return s;
}

}  // namespace

const char* to_string(CountFamily family) noexcept { return family == CountFamily::poisson ? "poisson" : "zinb"; }

CountFamily parse_count_family(const std::string& name) {
  if (name == "zinb") return CountFamily::zinb;
  if (name == "poisson") return CountFamily::poisson;
  throw InvalidArgument("unknown count family '" + name + "' (zinb|poisson)");
}

double nb_pmf(long k, double theta, double r) {
  if (k < 0) throw InvalidArgument("nb_pmf: k must be >= 0");
  check_zinb_args(0.0, theta, r);
  const double kk = static_cast<double>(k);
  const double log_p = std::lgamma(kk + r) - std::lgamma(r) - std::lgamma(kk + 1.0) + kk * std::log(theta) -
                       (kk + r) * std::log1p(theta);
  return std::exp(log_p);
}

double zinb_pmf(long k, double q, double theta, double r) {
  if (k < 0) throw InvalidArgument("zinb_pmf: k must be >= 0");
  check_zinb_args(q, theta, r);
  const double nb = q < 1.0 ? nb_pmf(k, theta, r) : 0.0;
  return (k == 0 ? q : 0.0) + (1.0 - q) * nb;
}

FrequencyData make_frequency_data(const Portfolio& portfolio, const ValuationContext& context,
                                  std::span<const double> p) {
  const auto& pols = portfolio.policies();
  if (p.size() != pols.size()) throw InvalidArgument("make_frequency_data: one p_j per policy is required");
  const double tau = context.tau;
  std::vector<double> reported(pols.size(), 0.0);
  for (auto i : context.reported_idx) reported[portfolio.policy_index(portfolio.claims()[i].policy_id)] += 1.0;

  FrequencyData d;
  for (std::size_t j = 0; j < pols.size(); ++j) {
    if (pols[j].contract_start >= tau) continue;
    if (!(p[j] >= 0.0 && p[j] <= 1.0)) throw InvalidArgument("make_frequency_data: p_j outside [0, 1]");
    d.policy_idx.push_back(j);
  }
  const auto n = static_cast<Eigen::Index>(d.policy_idx.size());
  const auto dx = static_cast<Eigen::Index>(portfolio.covariate_schema().size());
  d.zero_design.resize(n, dx + 2);
  d.mean_design.resize(n, dx + 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto j = d.policy_idx[static_cast<std::size_t>(r)];
    const auto& pol = pols[j];
    d.zero_design(r, 0) = 1.0;
    d.mean_design(r, 0) = 1.0;
    for (Eigen::Index k = 0; k < dx; ++k) {
      d.zero_design(r, k + 1) = pol.covariates[static_cast<std::size_t>(k)];
      d.mean_design(r, k + 1) = pol.covariates[static_cast<std::size_t>(k)];
    }
    d.zero_design(r, dx + 1) = pol.exposure;
    d.counts.push_back(reported[j]);
    d.exposure.push_back(pol.exposure * pol.elapsed_length(tau) / (pol.contract_end - pol.contract_start));
    d.p.push_back(p[j]);
  }
  return d;
}

double ZinbModel::zero_probability(std::span<const double> zero_row) const {
  if (family == CountFamily::poisson) return 0.0;
  return logistic(row_dot(zero_row, beta_zero));
}

double ZinbModel::theta(std::span<const double> mean_row) const { return std::exp(row_dot(mean_row, beta_mean)); }

double zinb_log_likelihood(const FrequencyData& data, CountFamily family, const Eigen::VectorXd& params,
                           Eigen::VectorXd* gradient, Eigen::MatrixXd* hessian) {
  const bool zi = family == CountFamily::zinb;
  const Eigen::Index pz = zi ? data.zero_design.cols() : 0;
  const Eigen::Index pm = data.mean_design.cols();
  const Eigen::Index P = pz + pm + (zi ? 1 : 0);
  if (params.size() != P) throw InvalidArgument("zinb_log_likelihood: parameter vector has wrong length");
  const auto n = static_cast<Eigen::Index>(data.counts.size());
  const std::span<const double> gam(params.data(), static_cast<std::size_t>(pz));
  const std::span<const double> bet(params.data() + pz, static_cast<std::size_t>(pm));
  const double rho = zi ? params[P - 1] : 0.0;
  const double r = std::exp(rho);
  const bool derivs = gradient || hessian;

  // per-observation derivatives in (a, eta, rho)
  Eigen::VectorXd la, le, lr, laa, lae, lar, lee, ler, lrr;
  if (derivs) {
    for (auto* v : {&la, &le, &lr, &laa, &lae, &lar, &lee, &ler, &lrr}) v->setZero(n);
  }
  const double psi_r = zi && derivs ? boost::math::digamma(r) : 0.0;
  const double tri_r = zi && hessian ? boost::math::trigamma(r) : 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const double k = data.counts[ii];
    const double off = data.exposure[ii] * data.p[ii];
    if (!(off > 0.0)) {
      if (k > 0.0) throw InvalidArgument("zinb: positive count with zero offset");
      continue;
    }
    const double eta = std::log(off) + dot(data.mean_design, i, bet);
    if (!zi) {
      const double mu = std::exp(eta);
      total += k * eta - mu - std::lgamma(k + 1.0);
      if (derivs) {
        le[i] = k - mu;
        lee[i] = -mu;
      }
      continue;
    }
    const double a = dot(data.zero_design, i, gam);
    const double sp_a = softplus(a);
    const double sp_e = softplus(eta);
    const double s = logistic(eta);
    const double sa = logistic(a);
    if (k > 0.0) {
      total += -sp_a + std::lgamma(k + r) - std::lgamma(r) - std::lgamma(k + 1.0) + k * eta - (k + r) * sp_e;
      if (!derivs) continue;
      la[i] = -sa;
      laa[i] = -sa * (1.0 - sa);
      le[i] = k - (k + r) * s;
      lee[i] = -(k + r) * s * (1.0 - s);
      lr[i] = r * (boost::math::digamma(k + r) - psi_r - sp_e);
      if (hessian) lrr[i] = lr[i] + r * r * (boost::math::trigamma(k + r) - tri_r);
      ler[i] = -r * s;
    } else {
      const double v = -r * sp_e;
      const double hi = std::max(a, v);
      total += hi + std::log1p(std::exp(-std::abs(a - v))) - sp_a;
      if (!derivs) continue;
      const double w = logistic(a - v);
      const double ww = w * (1.0 - w);
      const double ve = -r * s;
      const double vr = v;
      la[i] = w - sa;
      laa[i] = ww - sa * (1.0 - sa);
      le[i] = (1.0 - w) * ve;
      lr[i] = (1.0 - w) * vr;
      lee[i] = ww * ve * ve + (1.0 - w) * (-r * s * (1.0 - s));
      lrr[i] = ww * vr * vr + (1.0 - w) * v;
      ler[i] = ww * ve * vr + (1.0 - w) * (-r * s);
      lae[i] = -ww * ve;
      lar[i] = -ww * vr;
    }
  }
  if (gradient) {
    gradient->setZero(P);
    if (zi) {
      gradient->head(pz) = data.zero_design.transpose() * la;
      (*gradient)[P - 1] = lr.sum();
    }
    gradient->segment(pz, pm) = data.mean_design.transpose() * le;
  }
  if (hessian) {
    auto& H = *hessian;
    H.setZero(P, P);
    const auto& Z = data.zero_design;
    const auto& M = data.mean_design;
    H.block(pz, pz, pm, pm) = M.transpose() * lee.asDiagonal() * M;
    if (zi) {
      H.topLeftCorner(pz, pz) = Z.transpose() * laa.asDiagonal() * Z;
      H.block(0, pz, pz, pm) = Z.transpose() * lae.asDiagonal() * M;
      H.block(pz, 0, pm, pz) = H.block(0, pz, pz, pm).transpose();
      H.block(0, P - 1, pz, 1) = Z.transpose() * lar;
      H.block(P - 1, 0, 1, pz) = H.block(0, P - 1, pz, 1).transpose();
      H.block(pz, P - 1, pm, 1) = M.transpose() * ler;
      H.block(P - 1, pz, 1, pm) = H.block(pz, P - 1, pm, 1).transpose();
      H(P - 1, P - 1) = lrr.sum();
    }
  }
  return total;
}

ZinbModel fit_zinb(const FrequencyData& data, const ZinbFitOptions& options) {
  const bool zi = options.family == CountFamily::zinb;
  double total_count = 0.0, total_offset = 0.0;
  for (std::size_t i = 0; i < data.counts.size(); ++i) {
    total_count += data.counts[i];
    total_offset += data.exposure[i] * data.p[i];
  }
  if (data.counts.empty() || !(total_count > 0.0))
    throw DegenerateFit("fit_zinb: all reported counts are zero");
  const Eigen::Index pz = zi ? data.zero_design.cols() : 0;
  const Eigen::Index pm = data.mean_design.cols();
  const Eigen::Index P = pz + pm + (zi ? 1 : 0);

  Eigen::VectorXd start = Eigen::VectorXd::Zero(P);
  const double q0 = 0.2;
  if (zi) {
    start[0] = std::log(q0 / (1.0 - q0));
    start[P - 1] = 0.0;
    start[pz] = std::log(total_count / (total_offset * (1.0 - q0)));
  } else {
    start[0] = std::log(total_count / total_offset);
  }

  const detail::NewtonOptions nopts{options.hessian_ridge, options.max_iterations, options.gradient_tolerance};
  auto full = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
    return zinb_log_likelihood(data, options.family, x, g, h);
  };
  auto res = detail::newton_maximize(full, start, nopts);
  std::vector<std::string> warnings;
  if (!res.diagnostics.converged && zi) {
    warnings.push_back("joint Newton failed; golden-section search on log r");
    Eigen::VectorXd inner = start.head(P - 1);
    auto profile = [&](double rho) {
      auto f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
        Eigen::VectorXd full_x(P);
        full_x << x, rho;
        Eigen::VectorXd fg;
        Eigen::MatrixXd fh;
        const double v = zinb_log_likelihood(data, options.family, full_x, g ? &fg : nullptr, h ? &fh : nullptr);
        if (g) *g = fg.head(P - 1);
        if (h) *h = fh.topLeftCorner(P - 1, P - 1);
        return v;
      };
      auto r = detail::newton_maximize(f, inner, nopts);
      if (std::isfinite(r.value)) inner = r.x;
      return std::isfinite(r.value) ? r.value : -std::numeric_limits<double>::infinity();
    };
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::log(1e-3), hi = std::log(1e4);
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = profile(x1), f2 = profile(x2);
    while (hi - lo > 1e-7) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = profile(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = profile(x1);
      }
    }
    const double rho = 0.5 * (lo + hi);
    profile(rho);
    Eigen::VectorXd polished(P);
    polished << inner, rho;
    res = detail::newton_maximize(full, polished, nopts);
  }
  FitDiagnostics diag = res.diagnostics;
  diag.warnings = warnings;
  if (!diag.converged) throw ConvergenceFailure("fit_zinb: gradient tolerance not reached", diag);

  ZinbModel model;
  model.family = options.family;
  model.beta_zero.assign(res.x.data(), res.x.data() + pz);
  model.beta_mean.assign(res.x.data() + pz, res.x.data() + pz + pm);
  model.dispersion = zi ? std::exp(res.x[P - 1]) : std::numeric_limits<double>::infinity();
  model.standard_errors = detail::standard_errors(res.hessian);
  if (zi) {
    // likelihood-ratio test against the same model with q = 0
    const double q_zero_logit = -60.0;
    auto restricted = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
      Eigen::VectorXd full_x = Eigen::VectorXd::Zero(P);
      full_x[0] = q_zero_logit;
      full_x.tail(P - pz) = x;
      Eigen::VectorXd fg;
      Eigen::MatrixXd fh;
      const double v = zinb_log_likelihood(data, options.family, full_x, g ? &fg : nullptr, h ? &fh : nullptr);
      if (g) *g = fg.tail(P - pz);
      if (h) *h = fh.bottomRightCorner(P - pz, P - pz);
      return v;
    };
    const auto nb = detail::newton_maximize(restricted, res.x.tail(P - pz), nopts);
    const boost::math::chi_squared chi2(static_cast<double>(pz));
    const double critical = boost::math::quantile(chi2, 0.95);
    if (nb.diagnostics.converged && 2.0 * (res.value - nb.value) < critical) {
      model.zero_boundary = true;
      diag.warnings.push_back("zero inflation not supported by the data (q at the boundary 0)");
    }
  }
  model.diagnostics = diag;
  return model;
}

double IbnrCountLaw::pmf(long k) const {
  const double scale = exposure * thinning_complement * theta_tilde;
  if (family == CountFamily::poisson) {
    if (k < 0) throw InvalidArgument("pmf: k must be >= 0");
    if (!(scale > 0.0)) return k == 0 ? 1.0 : 0.0;
    const double kk = static_cast<double>(k);
    return std::exp(kk * std::log(scale) - scale - std::lgamma(kk + 1.0));
  }
  if (!(scale > 0.0)) {
    if (k < 0) throw InvalidArgument("pmf: k must be >= 0");
    return k == 0 ? 1.0 : 0.0;
  }
  return zinb_pmf(k, q_tilde, scale, r_tilde);
}

IbnrCountLaw ibnr_conditional(CountFamily family, double q, double theta, double r, double exposure, double p,
                              long n_reported) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("ibnr_conditional: p must lie in [0, 1]");
  if (n_reported < 0) throw InvalidArgument("ibnr_conditional: n_reported must be >= 0");
  if (!(exposure >= 0.0)) throw InvalidArgument("ibnr_conditional: exposure must be >= 0");
  IbnrCountLaw law;
  law.family = family;
  law.thinning_complement = 1.0 - p;
  law.exposure = exposure;
  if (family == CountFamily::poisson) {
    if (!(theta > 0.0)) throw InvalidArgument("ibnr_conditional: theta must be > 0");
    law.theta_tilde = theta;
    law.r_tilde = std::numeric_limits<double>::infinity();
    return law;
  }
  check_zinb_args(q, theta, r);
  const double shrink = 1.0 + theta * exposure * p;
  law.theta_tilde = theta / shrink;
  law.r_tilde = r + static_cast<double>(n_reported);
  if (n_reported == 0 && q > 0.0) {
    const double nb_zero = std::exp(-r * std::log1p(theta * exposure * p));
    law.q_tilde = q / (q + (1.0 - q) * nb_zero);
  }
  return law;
}

IbnrCountLaw ibnr_conditional(const ZinbModel& model, std::span<const double> zero_row,
                              std::span<const double> mean_row, double exposure, double p, long n_reported) {
  const double q = model.family == CountFamily::poisson ? 0.0 : model.zero_probability(zero_row);
  return ibnr_conditional(model.family, q, model.theta(mean_row), model.dispersion, exposure, p, n_reported);
}

double expected_ibnr_count(const IbnrCountLaw& law) {
  if (law.family == CountFamily::poisson) return law.thinning_complement * law.exposure * law.theta_tilde;
  return (1.0 - law.q_tilde) * law.r_tilde * law.thinning_complement * law.exposure * law.theta_tilde;
}

std::vector<IbnrCountLaw> ibnr_laws(const ZinbModel& model, const FrequencyData& data) {
  std::vector<IbnrCountLaw> laws;
  laws.reserve(data.counts.size());
  std::vector<double> zr(static_cast<std::size_t>(data.zero_design.cols()));
  std::vector<double> mr(static_cast<std::size_t>(data.mean_design.cols()));
  for (Eigen::Index i = 0; i < data.mean_design.rows(); ++i) {
    for (std::size_t k = 0; k < zr.size(); ++k) zr[k] = data.zero_design(i, static_cast<Eigen::Index>(k));
    for (std::size_t k = 0; k < mr.size(); ++k) mr[k] = data.mean_design(i, static_cast<Eigen::Index>(k));
    const auto ii = static_cast<std::size_t>(i);
    laws.push_back(ibnr_conditional(model, zr, mr, data.exposure[ii], data.p[ii],
                                    static_cast<long>(data.counts[ii])));
  }
  return laws;
}

void write_ibnr_law_csv(std::ostream& out, const Portfolio& portfolio, const FrequencyData& data,
                        std::span<const IbnrCountLaw> laws) {
  if (laws.size() != data.policy_idx.size()) throw InvalidArgument("write_ibnr_law_csv: size mismatch");
  out << "policy_id,q_tilde,theta_tilde,r_tilde,lambda_ibnr\n";
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const auto& l = laws[i];
    out << portfolio.policies()[data.policy_idx[i]].policy_id << ',' << format_real(l.q_tilde) << ','
        << format_real(l.theta_tilde) << ',' << format_real(l.r_tilde) << ','
        << format_real(expected_ibnr_count(l)) << '\n';
  }
}

}  // namespace ibnr
