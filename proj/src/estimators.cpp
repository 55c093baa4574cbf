#include "ibnr/estimators.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <ostream>
#include <sstream>

#include "ibnr/csv_io.hpp"

namespace ibnr {

namespace {

void record_pis(ReserveEstimate& e, const InclusionProbabilities& pis) {
  e.clamped = pis.clamped_count();
  if (pis.size() == 0) return;
  const auto [lo, hi] = std::minmax_element(pis.values().begin(), pis.values().end());
  e.min_pi = *lo;
  e.max_pi = *hi;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

constexpr std::array<EstimatorKind, 8> registry{EstimatorKind::cl,     EstimatorKind::ipw,   EstimatorKind::aipw,
                                                EstimatorKind::aipw_cl, EstimatorKind::ml,    EstimatorKind::ml_wbp,
                                                EstimatorKind::ml_wl,  EstimatorKind::cred};

}  // namespace

long period_of(double t, double origin, double width) {
  if (!(width > 0.0)) throw InvalidArgument("period width must be > 0");
  const double k = std::ceil((t - origin) / width) - 1.0;
  return k < 0.0 ? 0L : static_cast<long>(k);
}

std::size_t period_count(double tau, double origin, double width) {
  if (!(width > 0.0)) throw InvalidArgument("period width must be > 0");
  if (!(tau > origin)) throw InvalidArgument("valuation time must follow the triangle origin");
  return static_cast<std::size_t>(std::ceil((tau - origin) / width));
}

Triangle build_triangle(const Portfolio& portfolio, const ValuationContext& context, double period_width,
                        double origin, bool counts) {
  const auto m = period_count(context.tau, origin, period_width);
  Triangle t;
  t.period_width = period_width;
  t.origin = origin;
  t.cumulative.resize(m);
  for (std::size_t k = 0; k < m; ++k) t.cumulative[k].assign(m - k, 0.0);
  for (auto i : context.reported_idx) {
    const auto& c = portfolio.claims()[i];
    if (c.accident_time < origin) throw InvalidArgument("build_triangle: claim precedes the triangle origin");
    const auto k = static_cast<std::size_t>(period_of(c.accident_time, origin, period_width));
    const auto r = static_cast<std::size_t>(period_of(c.report_time(), origin, period_width));
    const auto d = r - k;
    t.cumulative[k][d] += counts ? 1.0 : c.severity;
  }
  for (auto& row : t.cumulative)
    for (std::size_t d = 1; d < row.size(); ++d) row[d] += row[d - 1];
  return t;
}

Triangle make_triangle(std::vector<std::vector<double>> rows, double period_width, double origin) {
  const auto m = rows.size();
  for (std::size_t k = 0; k < m; ++k) {
    if (rows[k].size() != m - k) throw InvalidArgument("make_triangle: row " + std::to_string(k) + " must have " + std::to_string(m - k) + " cells");
    for (std::size_t d = 0; d < rows[k].size(); ++d) {
      if (!(rows[k][d] >= 0.0) || !std::isfinite(rows[k][d])) throw InvalidArgument("make_triangle: cells must be finite and >= 0");
      if (d > 0 && rows[k][d] < rows[k][d - 1]) throw InvalidArgument("make_triangle: cumulative rows must be nondecreasing");
    }
  }
  Triangle t;
  t.cumulative = std::move(rows);
  t.period_width = period_width;
  t.origin = origin;
  return t;
}

ChainLadderResult chain_ladder(const Triangle& triangle) {
  const auto m = triangle.periods();
  ChainLadderResult out;
  out.factors.assign(m > 0 ? m - 1 : 0, 1.0);
  std::vector<std::size_t> bad;
  for (std::size_t d = 0; d + 1 < m; ++d) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k + d + 1 < m; ++k) {
      num += triangle.cumulative[k][d + 1];
      den += triangle.cumulative[k][d];
    }
    if (!(den > 0.0)) {
      bad.push_back(d);
      continue;
    }
    out.factors[d] = num / den;
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "chain_ladder: zero denominator in development column(s)";
    for (auto d : bad) msg << ' ' << d;
    throw EstimatorUndefined(msg.str());
  }
  out.to_ultimate.assign(m, 1.0);
  out.implied_pi.assign(m, 1.0);
  out.latest.assign(m, 0.0);
  double reserve = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double f = 1.0;
    for (std::size_t d = m - 1 - k; d + 1 < m; ++d) f *= out.factors[d];
    out.to_ultimate[k] = f;
    out.implied_pi[k] = 1.0 / f;
    out.latest[k] = triangle.cumulative[k].back();
    reserve += out.latest[k] * (f - 1.0);
  }
  out.estimate.label = "CL";
  out.estimate.point = reserve;
  out.estimate.model_term = reserve;
  if (m > 0) {
    const auto [lo, hi] = std::minmax_element(out.implied_pi.begin(), out.implied_pi.end());
    out.estimate.min_pi = *lo;
    out.estimate.max_pi = *hi;
  }
  return out;
}

InclusionProbabilities cohort_probabilities(const Portfolio& portfolio, const ValuationContext& context,
                                            const ChainLadderResult& cl, double period_width, double origin) {
  const auto m = period_count(context.tau, origin, period_width);
  if (cl.implied_pi.size() != m) throw InvalidArgument("cohort_probabilities: triangle does not match tau");
  std::vector<int> seen(m, 0);
  std::vector<double> raw;
  raw.reserve(context.reported_idx.size());
  for (auto i : context.reported_idx) {
    const auto k = static_cast<std::size_t>(period_of(portfolio.claims()[i].accident_time, origin, period_width));
    seen[k] = 1;
    raw.push_back(cl.implied_pi[k]);
  }
  std::vector<int> empty;
  for (std::size_t k = 0; k < m; ++k)
    if (!seen[k]) empty.push_back(static_cast<int>(k));
  if (!empty.empty()) {
    std::ostringstream msg;
    msg << "accident period(s) without reported claims:";
    for (int k : empty) msg << ' ' << k;
    throw UndefinedCohort(msg.str(), empty);
  }
  return InclusionProbabilities::make(std::move(raw), ProbabilitySource::chain_ladder_implied);
}

ReserveEstimate ipw_reserve(std::span<const double> y, const InclusionProbabilities& pis) {
  if (y.size() != pis.size()) throw InvalidArgument("ipw_reserve: severities and probabilities differ in length");
  ReserveEstimate e;
  e.label = "IPW";
  for (std::size_t i = 0; i < y.size(); ++i) e.point += odds_ratio(pis[i]) * y[i];
  e.ipw_term = e.point;
  record_pis(e, pis);
  return e;
}

ReserveEstimate aipw_reserve(std::span<const double> y, std::span<const double> yhat, double model_total,
                             const InclusionProbabilities& pis) {
  if (y.size() != yhat.size() || y.size() != pis.size())
    throw InvalidArgument("aipw_reserve: severities, predictions and probabilities differ in length");
  ReserveEstimate e;
  e.label = "AIPW";
  double ipw = 0.0, aug = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double w = odds_ratio(pis[i]);
    ipw += w * y[i];
    aug += w * (y[i] - yhat[i]);
  }
  e.model_term = model_total;
  e.augmentation_term = aug;
  e.ipw_term = ipw;
  e.point = model_total + aug;
  record_pis(e, pis);
  return e;
}

ReserveEstimate aipw_cl_reserve(std::span<const double> y, std::span<const double> yhat, double model_total,
                                const InclusionProbabilities& cl_pis) {
  auto e = aipw_reserve(y, yhat, model_total, cl_pis);
  e.label = "AIPW-CL";
  return e;
}

ReserveEstimate ml_reserve(std::span<const double> lambda, std::span<const double> yhat, const std::string& label) {
  if (lambda.size() != yhat.size()) throw InvalidArgument("ml_reserve: counts and predictions differ in length");
  ReserveEstimate e;
  e.label = label;
  for (std::size_t j = 0; j < lambda.size(); ++j) e.point += lambda[j] * yhat[j];
  e.model_term = e.point;
  return e;
}

CredibilityResult credibility_ultimate(double cl_ultimate, double expert_ultimate, double z, double cl_pi) {
  if (!(z >= 0.0 && z <= 1.0)) throw InvalidArgument("credibility: Z must lie in [0, 1]");
  if (!(cl_pi > 0.0 && cl_pi <= 1.0)) throw InvalidArgument("credibility: CL implied probability must lie in (0, 1]");
  CredibilityResult r;
  r.convex = z * cl_ultimate + (1.0 - z) * expert_ultimate;
  if (z == 0.0) {
    r.rearranged = expert_ultimate;
  } else {
    const double reported = cl_pi * cl_ultimate;
    r.rearranged = expert_ultimate + (reported - expert_ultimate * cl_pi) / (cl_pi / z);
  }
  return r;
}

ReserveEstimate credibility_reserve(double cl_ultimate, double expert_ultimate, double z, double cl_pi) {
  const auto c = credibility_ultimate(cl_ultimate, expert_ultimate, z, cl_pi);
  const double reported = cl_pi * cl_ultimate;
  ReserveEstimate e;
  e.label = "CRED";
  e.point = c.convex - reported;
  e.model_term = expert_ultimate - reported;
  e.augmentation_term = e.point - e.model_term;
  e.min_pi = e.max_pi = cl_pi;
  return e;
}

const char* to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::cl: return "CL";
    case EstimatorKind::ipw: return "IPW";
    case EstimatorKind::aipw: return "AIPW";
    case EstimatorKind::aipw_cl: return "AIPW-CL";
    case EstimatorKind::ml: return "ML";
    case EstimatorKind::ml_wbp: return "ML-wBP";
    case EstimatorKind::ml_wl: return "ML-WL";
    case EstimatorKind::cred: return "CRED";
  }
  return "unknown";
}

EstimatorKind parse_estimator(const std::string& name) {
  const auto key = upper(name);
  for (auto k : registry)
    if (upper(to_string(k)) == key) return k;
  throw UnknownEstimator(name);
}

std::vector<EstimatorKind> parse_estimator_list(const std::string& list) {
  std::vector<EstimatorKind> out;
  std::string item;
  std::istringstream in(list);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    const auto k = parse_estimator(item);
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  return out;
}

std::span<const EstimatorKind> all_estimators() noexcept { return registry; }

void write_estimates_header(std::ostream& out) {
  out << "valuation_date,estimator,point,model_term,augmentation_term,interval_lo,interval_hi\n";
}

void write_estimate_row(std::ostream& out, double valuation_date, const ReserveEstimate& e) {
  out << format_real(valuation_date) << ',' << e.label << ',' << format_real(e.point) << ','
      << format_real(e.model_term) << ',' << format_real(e.augmentation_term) << ',';
  if (e.interval) out << format_real(e.interval->lo) << ',' << format_real(e.interval->hi);
  else out << ',';
  out << '\n';
}

}  // namespace ibnr
