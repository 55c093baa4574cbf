#include "ibnr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "ibnr/csv_io.hpp"
#include "ibnr/parallel.hpp"

namespace ibnr {

namespace {

constexpr std::uint64_t geometric_stream = 0x67656f6d00000003ULL;

double quantile_sorted(const std::vector<double>& s, double prob) {
  const double h = (static_cast<double>(s.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

PseudoPopulation fixed_pseudo_population(std::span<const std::size_t> source, const InclusionProbabilities& pis) {
  if (source.size() != pis.size()) throw InvalidArgument("fixed_pseudo_population: size mismatch");
  PseudoPopulation p;
  p.mode = PseudoMode::fixed;
  p.source.assign(source.begin(), source.end());
  p.weight.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) p.weight.push_back(odds_ratio(pis[i]));
  return p;
}

long draw_geometric(double pi, CounterRng& rng) {
  if (!(pi > 0.0 && pi <= 1.0)) throw InvalidArgument("draw_geometric: pi must lie in (0, 1]");
  if (pi == 1.0) return 0;
  return std::geometric_distribution<long>(pi)(rng);
}

PseudoPopulation geometric_pseudo_population(std::span<const std::size_t> source, const InclusionProbabilities& pis,
                                             std::uint64_t seed, std::uint64_t replicate) {
  if (source.size() != pis.size()) throw InvalidArgument("geometric_pseudo_population: size mismatch");
  PseudoPopulation p;
  p.mode = PseudoMode::geometric;
  p.seed = seed;
  p.source.assign(source.begin(), source.end());
  p.weight.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    auto rng = CounterRng::substream(seed, geometric_stream, replicate, i);
    p.weight.push_back(static_cast<double>(draw_geometric(pis[i], rng)));
  }
  return p;
}

WeightedEcdf::WeightedEcdf(std::vector<double> values, std::vector<double> cumulative)
    : values_(std::move(values)), cumulative_(std::move(cumulative)) {}

double WeightedEcdf::operator()(double y) const noexcept {
  auto it = std::upper_bound(values_.begin(), values_.end(), y);
  if (it == values_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

WeightedEcdf weighted_ecdf(std::span<const double> weights, std::span<const double> severities) {
  if (weights.size() != severities.size()) throw InvalidArgument("weighted_ecdf: size mismatch");
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return severities[a] < severities[b]; });
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("weighted_ecdf: weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw UndefinedDistribution("weighted_ecdf: total weight is zero");
  std::vector<double> values, cumulative;
  double acc = 0.0;
  for (auto i : order) {
    if (weights[i] == 0.0) continue;
    acc += weights[i];
    if (!values.empty() && values.back() == severities[i]) {
      cumulative.back() = acc / total;
    } else {
      values.push_back(severities[i]);
      cumulative.push_back(acc / total);
    }
  }
  cumulative.back() = 1.0;
  return WeightedEcdf(std::move(values), std::move(cumulative));
}

WeightedEcdf weighted_ecdf(const PseudoPopulation& pseudo, std::span<const double> severities) {
  return weighted_ecdf(pseudo.weight, severities);
}

BootstrapResult bootstrap_reserve(std::span<const double> y, const InclusionProbabilities& pis, std::size_t replicates,
                                  std::uint64_t seed, double level, unsigned threads,
                                  const ReplicateStatistic& statistic) {
  if (replicates < 100) throw InvalidArgument("bootstrap_reserve: at least 100 replicates are required");
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("bootstrap_reserve: level must lie in (0, 1)");
  if (y.size() != pis.size()) throw InvalidArgument("bootstrap_reserve: size mismatch");
  BootstrapResult out;
  out.totals.assign(replicates, 0.0);
  parallel_for(replicates, threads, [&](std::size_t b) {
    std::vector<long> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      auto rng = CounterRng::substream(seed, geometric_stream, b, i);
      z[i] = draw_geometric(pis[i], rng);
    }
    if (statistic) {
      out.totals[b] = statistic(z);
    } else {
      double t = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) t += static_cast<double>(z[i]) * y[i];
      out.totals[b] = t;
    }
  });
  out.mean = std::accumulate(out.totals.begin(), out.totals.end(), 0.0) / static_cast<double>(replicates);
  std::vector<double> sorted = out.totals;
  std::sort(sorted.begin(), sorted.end());
  out.interval.level = level;
  out.interval.method = "geometric-bootstrap-percentile";
  out.interval.lo = quantile_sorted(sorted, 0.5 * (1.0 - level));
  out.interval.hi = quantile_sorted(sorted, 0.5 * (1.0 + level));
  return out;
}

void write_pseudo_population_csv(std::ostream& out, const Portfolio& portfolio, const PseudoPopulation& pseudo) {
  out << "source_claim_id,weight\n";
  for (std::size_t i = 0; i < pseudo.source.size(); ++i)
    out << portfolio.claims()[pseudo.source[i]].claim_id << ',' << format_real(pseudo.weight[i]) << '\n';
}

}  // namespace ibnr
