#include <doctest.h>

#include <sstream>

#include "ibnr/estimators.hpp"

using namespace ibnr;

namespace {

InclusionProbabilities fixed(std::vector<double> v) {
  return InclusionProbabilities::make(std::move(v), ProbabilitySource::fixed);
}

}  // namespace

TEST_CASE("chain ladder on a two-period triangle") {
  const auto t = make_triangle({{100.0, 150.0}, {120.0}});
  const auto cl = chain_ladder(t);
  REQUIRE(cl.factors.size() == 1);
  CHECK(cl.factors[0] == doctest::Approx(1.5));
  CHECK(cl.estimate.point == doctest::Approx(60.0));
  CHECK(cl.implied_pi[0] == 1.0);
  CHECK(cl.implied_pi[1] == doctest::Approx(2.0 / 3.0));
  CHECK(cl.latest[1] * cl.to_ultimate[1] == doctest::Approx(180.0));
}

TEST_CASE("fully developed triangle") {
  const auto cl = chain_ladder(make_triangle({{10.0, 10.0, 10.0}, {5.0, 5.0}, {7.0}}));
  CHECK(cl.estimate.point == 0.0);
  for (double pi : cl.implied_pi) CHECK(pi == 1.0);
}

TEST_CASE("chain ladder errors") {
  CHECK_THROWS_AS(chain_ladder(make_triangle({{0.0, 5.0}, {3.0}})), EstimatorUndefined);
  CHECK_THROWS_AS(make_triangle({{1.0, 2.0}, {1.0, 2.0}}), InvalidArgument);
}

TEST_CASE("proportional triangle: CL equals IPW with implied probabilities") {
  const std::vector<double> pattern{0.4, 0.7, 0.9, 1.0};
  const std::vector<double> scale{100.0, 250.0, 80.0, 40.0};
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < scale.size(); ++k) {
    std::vector<double> row;
    for (std::size_t d = 0; d + k < scale.size(); ++d) row.push_back(scale[k] * pattern[d]);
    rows.push_back(row);
  }
  const auto cl = chain_ladder(make_triangle(rows));
  // one pseudo-claim per accident period carrying the latest diagonal
  const auto ipw = ipw_reserve(cl.latest, fixed(cl.implied_pi));
  CHECK(ipw.point == doctest::Approx(cl.estimate.point).epsilon(1e-12));
  for (std::size_t k = 0; k < scale.size(); ++k)
    CHECK(cl.implied_pi[k] == doctest::Approx(pattern[scale.size() - 1 - k]).epsilon(1e-14));

  // AIPW-CL with a zero model collapses to CL
  const std::vector<double> zero(cl.latest.size(), 0.0);
  CHECK(aipw_cl_reserve(cl.latest, zero, 0.0, fixed(cl.implied_pi)).point ==
        doctest::Approx(cl.estimate.point).epsilon(1e-12));
}

TEST_CASE("IPW examples") {
  const std::vector<double> y{100.0, 200.0};
  CHECK(ipw_reserve(y, fixed({0.25, 0.5})).point == doctest::Approx(500.0));
  CHECK(ipw_reserve(y, fixed({1.0, 1.0})).point == 0.0);
}

TEST_CASE("AIPW examples and decomposition") {
  const std::vector<double> y{100.0, 200.0, 50.0};
  const auto pis = fixed({0.25, 0.5, 0.8});
  const auto exact = aipw_reserve(y, y, 777.0, pis);
  CHECK(exact.point == doctest::Approx(777.0));
  CHECK(exact.augmentation_term == 0.0);
  CHECK(aipw_reserve(y, std::vector<double>{90.0, 150.0, 70.0}, 777.0, fixed({1.0, 1.0, 1.0})).point == 777.0);

  const std::vector<double> yhat{90.0, 150.0, 70.0};
  const auto a = aipw_reserve(y, yhat, 640.0, pis);
  const auto i = ipw_reserve(y, pis);
  const double odds_yhat = 3.0 * 90.0 + 1.0 * 150.0 + 0.25 * 70.0;
  CHECK(a.point - i.point == doctest::Approx(640.0 - odds_yhat).epsilon(1e-12));
  CHECK(a.model_term == 640.0);
  CHECK(a.point == doctest::Approx(a.model_term + a.augmentation_term));
  CHECK_THROWS_AS(aipw_reserve(y, std::vector<double>{1.0}, 0.0, pis), InvalidArgument);

  CHECK(aipw_cl_reserve(y, yhat, 55.0, fixed({1.0, 1.0, 1.0})).point == 55.0);
  CHECK(aipw_cl_reserve(y, y, 55.0, pis).point == doctest::Approx(55.0));
}

TEST_CASE("ML examples") {
  CHECK(ml_reserve(std::vector<double>{0.0, 0.0}, std::vector<double>{5.0, 7.0}).point == 0.0);
  CHECK(ml_reserve(std::vector<double>{2.0}, std::vector<double>{500.0}).point == doctest::Approx(1000.0));
  CHECK(ml_reserve(std::vector<double>{2.0}, std::vector<double>{500.0}, "ML-wBP").label == "ML-wBP");
}

TEST_CASE("credibility") {
  const double lr = 80.0, cl_ult = 120.0, expert = 150.0;
  const double pi = lr / cl_ult;
  CHECK(credibility_ultimate(cl_ult, expert, 1.0, pi).convex == doctest::Approx(cl_ult));
  CHECK(credibility_ultimate(cl_ult, expert, 0.0, pi).convex == doctest::Approx(expert));
  const auto r = credibility_ultimate(cl_ult, expert, 0.3, pi);
  CHECK(r.convex == doctest::Approx(r.rearranged).epsilon(1e-12));
  CHECK(credibility_reserve(cl_ult, expert, 0.3, pi).point == doctest::Approx(r.convex - lr));
  CHECK_THROWS_AS(credibility_ultimate(cl_ult, expert, 1.2, pi), InvalidArgument);
}

TEST_CASE("periods") {
  CHECK(period_of(0.5, 0.0, 1.0) == 0);
  CHECK(period_of(1.0, 0.0, 1.0) == 0);
  CHECK(period_of(1.0001, 0.0, 1.0) == 1);
  CHECK(period_of(0.0, 0.0, 1.0) == 0);
  CHECK(period_of(7.0, 1.0, 3.0) == 1);
  CHECK(period_count(3.0, 0.0, 1.0) == 3);
  CHECK(period_count(3.5, 0.0, 1.0) == 4);
}

TEST_CASE("triangle from claims") {
  std::vector<PolicyRecord> policies{{"p", 1.0, {}, 0.0, 10.0}};
  std::vector<Claim> claims{{"a", "p", 0.5, 0.3, 100.0, {}}, {"b", "p", 0.5, 1.0, 50.0, {}},
                            {"c", "p", 1.5, 0.3, 120.0, {}}, {"d", "p", 1.5, 2.0, 9.0, {}}};
  const auto p = Portfolio::make(policies, claims, {});
  const auto ctx = partition(p, 2.0);
  const auto t = build_triangle(p, ctx, 1.0);
  REQUIRE(t.periods() == 2);
  CHECK(t.cumulative[0] == std::vector<double>{100.0, 150.0});
  CHECK(t.cumulative[1] == std::vector<double>{120.0});
  const auto counts = build_triangle(p, ctx, 1.0, 0.0, true);
  CHECK(counts.cumulative[0] == std::vector<double>{1.0, 2.0});
}

TEST_CASE("estimator registry") {
  CHECK(parse_estimator("AIPW-CL") == EstimatorKind::aipw_cl);
  CHECK(parse_estimator("ML-wBP") == EstimatorKind::ml_wbp);
  CHECK_THROWS_AS(parse_estimator("GLM"), UnknownEstimator);
  CHECK(parse_estimator_list("").empty());
  const auto list = parse_estimator_list("IPW,CL,IPW");
  CHECK(list == std::vector<EstimatorKind>{EstimatorKind::ipw, EstimatorKind::cl});
  CHECK(all_estimators().size() == 8);
  for (auto k : all_estimators()) CHECK(parse_estimator(to_string(k)) == k);
}

TEST_CASE("estimate rows") {
  std::ostringstream out;
  write_estimates_header(out);
  ReserveEstimate e;
  e.label = "IPW";
  e.point = 500.0;
  write_estimate_row(out, 24.0, e);
  CHECK(out.str() ==
        "valuation_date,estimator,point,model_term,augmentation_term,interval_lo,interval_hi\n"
        "24,IPW,500,0,0,,\n");
}
