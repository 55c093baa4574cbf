#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

#include "ibnr/errors.hpp"

namespace ibnr::detail {

/// Objective value; fills gradient and Hessian when the pointers are non-null.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*, Eigen::MatrixXd*)>;

struct NewtonOptions {
  double hessian_ridge = 1e-8;
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
};

struct NewtonResult {
  Eigen::VectorXd x;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  double value = 0.0;
  FitDiagnostics diagnostics;
  bool indefinite = false;  // a Levenberg shift was needed at some step
};

/// Maximizes a concave-ish objective by damped Newton steps with backtracking.
/// Converges when the gradient sup-norm drops below tolerance, or when the
/// line search stalls with a Newton decrement at round-off level.
inline NewtonResult newton_maximize(const Objective& f, Eigen::VectorXd x, const NewtonOptions& opts) {
  NewtonResult out;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  double value = f(x, &g, &h);
  int iter = 0;
  bool converged = false;
  for (; iter < opts.max_iterations; ++iter) {
    if (!std::isfinite(value) || !g.allFinite() || !h.allFinite()) break;
    if (g.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd neg = -h;
    double shift = opts.hessian_ridge;
    const double scale = std::max(1.0, neg.diagonal().cwiseAbs().maxCoeff());
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd m = neg;
      m.diagonal().array() += shift;
      llt.compute(m);
      if (llt.info() == Eigen::Success) break;
      out.indefinite = true;
      shift = std::max(shift * 10.0, 1e-10 * scale);
    }
    if (llt.info() != Eigen::Success) break;
    const Eigen::VectorXd step = llt.solve(g);
    const double decrement = g.dot(step);
    // round-off in the objective must not block a step near the optimum
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(value));
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls) {
      const Eigen::VectorXd trial = x + t * step;
      if (trial == x) break;
      const double tv = f(trial, nullptr, nullptr);
      if (std::isfinite(tv) && tv >= value - slack) {
        x = trial;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      converged = decrement <= 1e-12 * std::max(1.0, std::abs(value));
      break;
    }
    value = f(x, &g, &h);
  }
  out.x = std::move(x);
  out.gradient = std::move(g);
  out.hessian = std::move(h);
  out.value = value;
  out.diagnostics.converged = converged && std::isfinite(value);
  out.diagnostics.iterations = iter;
  out.diagnostics.gradient_norm = out.gradient.size() ? out.gradient.norm() : 0.0;
  out.diagnostics.log_likelihood = value;
  return out;
}

/// Standard errors from the inverse observed information -H; empty when -H
/// is not positive definite.
inline std::vector<double> standard_errors(const Eigen::MatrixXd& hessian) {
  std::vector<double> se;
  const Eigen::MatrixXd info = -hessian;
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success) return se;
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  for (Eigen::Index k = 0; k < cov.rows(); ++k) se.push_back(std::sqrt(std::max(0.0, cov(k, k))));
  return se;
}

}  // namespace ibnr::detail
