#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "ibnr/claims.hpp"
#include "ibnr/estimators.hpp"
#include "ibnr/rng.hpp"

namespace ibnr {

enum class PseudoMode { fixed, geometric };

/// Replicated reported claims standing in for the unreported ones.
struct PseudoPopulation {
  std::vector<std::size_t> source;  // claim index in the portfolio
  std::vector<double> weight;       // odds ratio, or a geometric draw
  PseudoMode mode = PseudoMode::fixed;
  std::uint64_t seed = 0;
};

/// One row per source claim with weight (1 - pi) / pi.
PseudoPopulation fixed_pseudo_population(std::span<const std::size_t> source, const InclusionProbabilities& pis);

/// Failures before the first success with success probability pi.
long draw_geometric(double pi, CounterRng& rng);

/// Z_i ~ Geom(pi_i) drawn from the substream (seed, replicate, i).
PseudoPopulation geometric_pseudo_population(std::span<const std::size_t> source, const InclusionProbabilities& pis,
                                             std::uint64_t seed, std::uint64_t replicate = 0);

/// Right-continuous step function sum w 1{y_i <= y} / sum w.
class WeightedEcdf {
public:
  WeightedEcdf(std::vector<double> values, std::vector<double> cumulative);

  double operator()(double y) const noexcept;
  std::span<const double> values() const noexcept { return values_; }          // sorted distinct jump points
  std::span<const double> cumulative() const noexcept { return cumulative_; }  // F at each jump

private:
  std::vector<double> values_;
  std::vector<double> cumulative_;
};

/// `severities` is aligned with the pseudo-population rows. Throws
/// UndefinedDistribution when the total weight is zero.
WeightedEcdf weighted_ecdf(const PseudoPopulation& pseudo, std::span<const double> severities);
WeightedEcdf weighted_ecdf(std::span<const double> weights, std::span<const double> severities);

/// Statistic of one geometric replicate; the default is sum Z_i y_i.
using ReplicateStatistic = std::function<double(std::span<const long> draws)>;

struct BootstrapResult {
  Interval interval;
  double mean = 0.0;
  std::vector<double> totals;
};

/// B geometric replicates; percentile interval at `level`.
BootstrapResult bootstrap_reserve(std::span<const double> y, const InclusionProbabilities& pis, std::size_t replicates,
                                  std::uint64_t seed, double level = 0.9, unsigned threads = 1,
                                  const ReplicateStatistic& statistic = {});

/// source_claim_id,weight
void write_pseudo_population_csv(std::ostream& out, const Portfolio& portfolio, const PseudoPopulation& pseudo);

}  // namespace ibnr
