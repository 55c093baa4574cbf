#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ibnr {

/// Piecewise-constant hazard on [0, inf). Bin k covers [edges[k], edges[k+1]);
/// the last bin is open. edges[0] must be 0.
class StepHazard {
public:
  StepHazard() = default;
  StepHazard(std::vector<double> edges, std::vector<double> rates);

  std::size_t bins() const noexcept { return edges_.size(); }
  std::span<const double> edges() const noexcept { return edges_; }
  std::span<const double> rates() const noexcept { return rates_; }

  /// Index of the bin containing x (x >= 0).
  std::size_t bin_of(double x) const noexcept;

  /// Time spent in each bin on [0, x]; `out` must have bins() entries.
  void overlaps(double x, std::span<double> out) const noexcept;

  /// H(x) = integral of the hazard over [0, x].
  double cumulative(double x) const noexcept;

  /// Smallest x with H(x) = h. Requires h >= 0 and a positive final rate.
  double inverse_cumulative(double h) const;

  /// Exact integral over [a, b] of exp(-scale * H(e)) de, 0 <= a <= b.
  double survival_integral(double a, double b, double scale) const noexcept;

private:
  std::vector<double> edges_;
  std::vector<double> rates_;
};

/// Validates a bin grid: non-empty, starts at 0, strictly increasing.
void check_bin_edges(std::span<const double> edges);

}  // namespace ibnr
