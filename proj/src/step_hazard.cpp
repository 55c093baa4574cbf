#include "ibnr/step_hazard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ibnr/errors.hpp"

namespace ibnr {

void check_bin_edges(std::span<const double> edges) {
  if (edges.empty()) throw InvalidArgument("bin grid is empty");
  if (edges[0] != 0.0) throw InvalidArgument("bin grid must start at 0");
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (!(edges[k] > edges[k - 1]) || !std::isfinite(edges[k]))
      throw InvalidArgument("bin grid must be strictly increasing and finite");
  }
}

StepHazard::StepHazard(std::vector<double> edges, std::vector<double> rates)
    : edges_(std::move(edges)), rates_(std::move(rates)) {
  check_bin_edges(edges_);
  if (rates_.size() != edges_.size()) throw InvalidArgument("one hazard rate per bin is required");
  for (double r : rates_) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("hazard rates must be finite and >= 0");
  }
}

std::size_t StepHazard::bin_of(double x) const noexcept {
  auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - edges_.begin()) - 1));
}

void StepHazard::overlaps(double x, std::span<double> out) const noexcept {
  const std::size_t K = edges_.size();
  for (std::size_t k = 0; k < K; ++k) {
    const double lo = edges_[k];
    const double hi = k + 1 < K ? edges_[k + 1] : std::numeric_limits<double>::infinity();
    out[k] = x > lo ? std::min(x, hi) - lo : 0.0;
  }
}

double StepHazard::cumulative(double x) const noexcept {
  double h = 0.0;
  const std::size_t K = edges_.size();
  for (std::size_t k = 0; k < K && x > edges_[k]; ++k) {
    const double hi = k + 1 < K ? std::min(x, edges_[k + 1]) : x;
    h += rates_[k] * (hi - edges_[k]);
  }
  return h;
}

double StepHazard::inverse_cumulative(double h) const {
  if (!(h >= 0.0)) throw InvalidArgument("inverse_cumulative: h must be >= 0");
  const std::size_t K = edges_.size();
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    const double width = edges_[k + 1] - edges_[k];
    const double mass = rates_[k] * width;
    if (acc + mass >= h && rates_[k] > 0.0) return edges_[k] + (h - acc) / rates_[k];
    acc += mass;
  }
  if (!(rates_[K - 1] > 0.0)) throw InvalidArgument("final hazard rate must be > 0");
  return edges_[K - 1] + (h - acc) / rates_[K - 1];
}

double StepHazard::survival_integral(double a, double b, double scale) const noexcept {
  if (!(b > a)) return 0.0;
  double total = 0.0;
  const std::size_t K = edges_.size();
  double h_lo = cumulative(a);
  for (std::size_t k = bin_of(a); k < K; ++k) {
    const double lo = std::max(a, edges_[k]);
    const double hi = k + 1 < K ? std::min(b, edges_[k + 1]) : b;
    if (hi <= lo) {
      if (k + 1 < K && edges_[k + 1] >= b) break;
      continue;
    }
    const double slope = scale * rates_[k];
    const double width = hi - lo;
    const double lead = std::exp(-scale * h_lo);
    // integral of exp(-scale*(h_lo + rate*(e - lo))) over [lo, hi]
    total += slope > 0.0 ? lead * (-std::expm1(-slope * width)) / slope : lead * width;
    h_lo += rates_[k] * width;
    if (hi >= b) break;
  }
  return total;
}

}  // namespace ibnr
