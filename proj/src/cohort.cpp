#include "ibnr/estimators.hpp"
#include "ibnr/hazard.hpp"

namespace ibnr {

InclusionProbabilities empirical_cohort_probabilities(const Portfolio& portfolio, const ValuationContext& context,
                                                      double period_width, double origin) {
  const auto triangle = build_triangle(portfolio, context, period_width, origin);
  return cohort_probabilities(portfolio, context, chain_ladder(triangle), period_width, origin);
}

}  // namespace ibnr
