#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "ibnr/synthetic.hpp"

using namespace ibnr;

namespace {

InclusionProbabilities fixed(std::vector<double> v) {
  return InclusionProbabilities::make(std::move(v), ProbabilitySource::fixed);
}

}  // namespace

TEST_CASE("fixed pseudo-population weights") {
  const std::vector<std::size_t> src{4, 9};
  const auto ones = fixed_pseudo_population(src, fixed({1.0, 1.0}));
  CHECK(ones.weight == std::vector<double>{0.0, 0.0});
  CHECK(ones.source == src);

  const auto half = fixed_pseudo_population(std::vector<std::size_t>{0}, fixed({0.5}));
  CHECK(half.weight[0] == doctest::Approx(1.0));

  const std::vector<double> y{100.0, 200.0};
  const auto pis = fixed({0.25, 0.5});
  const auto pseudo = fixed_pseudo_population(src, pis);
  const double total = pseudo.weight[0] * y[0] + pseudo.weight[1] * y[1];
  CHECK(total == ipw_reserve(y, pis).point);
}

TEST_CASE("geometric draws") {
  auto rng = CounterRng::substream(1);
  for (int i = 0; i < 100; ++i) CHECK(draw_geometric(1.0, rng) == 0);

  auto g = CounterRng::substream(2);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(draw_geometric(0.5, g));
  CHECK(std::abs(sum / n - 1.0) < 0.02);

  const std::vector<std::size_t> src{0, 1, 2};
  const auto pis = fixed({0.3, 0.6, 0.9});
  const auto a = geometric_pseudo_population(src, pis, 5, 2);
  const auto b = geometric_pseudo_population(src, pis, 5, 2);
  const auto c = geometric_pseudo_population(src, pis, 5, 3);
  CHECK(a.weight == b.weight);
  CHECK(a.mode == PseudoMode::geometric);
  bool differs = false;
  for (int r = 4; r < 30 && !differs; ++r) differs = geometric_pseudo_population(src, pis, 5, r).weight != a.weight;
  CHECK((differs || c.weight != a.weight));
}

TEST_CASE("bootstrap") {
  const std::vector<double> y{100.0, 200.0, 50.0};
  const auto all = bootstrap_reserve(y, fixed({1.0, 1.0, 1.0}), 200, 1);
  CHECK(all.interval.lo == 0.0);
  CHECK(all.interval.hi == 0.0);
  CHECK(all.mean == 0.0);

  const auto pis = fixed({0.25, 0.5, 0.8});
  const std::size_t B = 4000;
  const auto boot = bootstrap_reserve(y, pis, B, 11, 0.9, 2);
  REQUIRE(boot.totals.size() == B);
  const double ipw = ipw_reserve(y, pis).point;
  double var = 0.0;
  for (double t : boot.totals) var += (t - boot.mean) * (t - boot.mean);
  var /= static_cast<double>(B - 1);
  CHECK(std::abs(boot.mean - ipw) < 2.0 * std::sqrt(var / B));
  CHECK(boot.interval.lo <= boot.mean);
  CHECK(boot.interval.hi >= boot.mean);
  CHECK(boot.interval.level == 0.9);

  // thread count does not change the replicates
  const auto serial = bootstrap_reserve(y, pis, B, 11, 0.9, 1);
  CHECK(serial.totals == boot.totals);
}

TEST_CASE("weighted ECDF") {
  const std::vector<double> y{3.0, 1.0, 2.0, 2.0};
  const auto e = weighted_ecdf(std::vector<double>{1.0, 1.0, 1.0, 1.0}, y);
  CHECK(e(0.5) == 0.0);
  CHECK(e(1.0) == doctest::Approx(0.25));
  CHECK(e(2.0) == doctest::Approx(0.75));
  CHECK(e(2.5) == doctest::Approx(0.75));
  CHECK(e(3.0) == doctest::Approx(1.0));
  CHECK(e.values().size() == 3);

  const auto single = weighted_ecdf(std::vector<double>{0.0, 2.0}, std::vector<double>{50.0, 100.0});
  CHECK(single(99.9) == 0.0);
  CHECK(single(100.0) == 1.0);

  const auto w = weighted_ecdf(std::vector<double>{1.0, 3.0, 0.5, 0.5}, y);
  const auto w7 = weighted_ecdf(std::vector<double>{7.0, 21.0, 3.5, 3.5}, y);
  for (double v : {0.0, 1.0, 1.5, 2.0, 3.0}) CHECK(w(v) == doctest::Approx(w7(v)).epsilon(1e-15));
  CHECK(w(1.0) == doctest::Approx(0.6));

  CHECK_THROWS_AS(weighted_ecdf(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 2.0}),
                  UndefinedDistribution);
}

TEST_CASE("pseudo-population CSV") {
  std::vector<PolicyRecord> policies{{"p", 1.0, {}, 0.0, 10.0}};
  std::vector<Claim> claims{{"c1", "p", 1.0, 1.0, 10.0, {}}, {"c2", "p", 1.0, 1.0, 20.0, {}}};
  const auto port = Portfolio::make(policies, claims, {});
  const auto pseudo = fixed_pseudo_population(std::vector<std::size_t>{1}, fixed({0.25}));
  std::ostringstream out;
  write_pseudo_population_csv(out, port, pseudo);
  CHECK(out.str() == "source_claim_id,weight\nc2,3\n");
}
