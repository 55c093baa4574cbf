#include "ibnr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "ibnr/csv_io.hpp"
#include "ibnr/parallel.hpp"
#include "ibnr/rng.hpp"
#include "ibnr/synthetic.hpp"

namespace ibnr {

namespace {

constexpr std::uint64_t report_stream = 0x7265706f72740004ULL;
constexpr std::uint64_t pilot_replicate = 1'000'000'007ULL;

struct Reason {
  std::string text;
  ErrorKind kind = ErrorKind::estimator_undefined;

  bool empty() const noexcept { return text.empty(); }
  void clear() { text.clear(); }
};

template <typename F>
auto attempt(F&& f, Reason& error) -> std::optional<decltype(f())> {
  try {
    return f();
  } catch (const Error& e) {
    error = {e.what(), e.kind()};
  } catch (const std::exception& e) {
    error = {e.what(), ErrorKind::estimator_undefined};
  }
  return std::nullopt;
}

bool wants(std::span<const EstimatorKind> set, std::initializer_list<EstimatorKind> any) {
  for (auto k : any)
    if (std::find(set.begin(), set.end(), k) != set.end()) return true;
  return false;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe m;
  const auto n = static_cast<double>(v.size());
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return m;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.se = std::sqrt(ss / (n - 1.0) / n);
  return m;
}

}  // namespace

Metrics metrics(std::span<const double> truth, std::span<const double> estimates) {
  if (truth.size() != estimates.size()) throw InvalidArgument("metrics: truth and estimates differ in length");
  if (truth.empty()) throw InvalidArgument("metrics: at least one entry is required");
  Metrics m;
  m.n = truth.size();
  double ape = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = truth[i] - estimates[i];
    m.me += e;
    m.mae += std::abs(e);
    m.rmse += e * e;
    if (truth[i] != 0.0) {
      ape += std::abs(e) / std::abs(truth[i]);
      ++m.mape_n;
    }
  }
  const auto n = static_cast<double>(m.n);
  m.me /= n;
  m.mae /= n;
  m.rmse = std::sqrt(m.rmse / n);
  if (m.mape_n > 0) m.mape = ape / static_cast<double>(m.mape_n);
  return m;
}

DateEvaluation evaluate_date(const Portfolio& portfolio, double tau, std::span<const EstimatorKind> estimators,
                             const PipelineOptions& options, const FittedModels* reuse,
                             const std::optional<std::vector<double>>& fixed_pis) {
  using K = EstimatorKind;
  DateEvaluation out;
  out.tau = tau;
  out.models.tau = tau;
  const auto ctx = partition(portfolio, tau);
  const auto& reported = ctx.reported_idx;
  const auto y = severities(portfolio, reported);
  const auto& pols = portfolio.policies();
  if (fixed_pis && fixed_pis->size() != reported.size())
    throw InvalidArgument("fixed inclusion probabilities do not match the reported claims");

  const bool need_lambda = wants(estimators, {K::aipw, K::aipw_cl, K::ml, K::ml_wbp, K::ml_wl, K::cred});
  const bool need_pi = wants(estimators, {K::ipw, K::aipw, K::ml_wbp, K::ml_wl});
  const bool need_cl = wants(estimators, {K::cl, K::aipw_cl, K::cred});
  const bool need_plain = wants(estimators, {K::aipw, K::aipw_cl, K::ml, K::ml_wbp, K::cred});

  // delay model
  Reason hazard_error;
  if ((need_pi && !fixed_pis) || need_lambda) {
    if (reuse && reuse->hazard) {
      out.models.hazard = reuse->hazard;
    } else {
      out.models.hazard = attempt(
          [&] {
            std::vector<std::size_t> cols;
            if (options.delay_covariates) {
              cols = *options.delay_covariates;
            } else {
              cols.resize(portfolio.covariate_schema().size());
              std::iota(cols.begin(), cols.end(), std::size_t{0});
            }
            std::vector<double> times;
            for (auto i : reported) times.push_back(portfolio.claims()[i].accident_time);
            const auto spec = make_feature_spec(cols, options.severity_effect, options.time_effect, y, times,
                                                options.effect_bins);
            return fit_hazard(make_delay_design(portfolio, ctx, spec), options.hazard);
          },
          hazard_error);
    }
  }

  Reason pi_error;
  std::optional<InclusionProbabilities> pis;
  if (need_pi) {
    if (fixed_pis) {
      pis = attempt([&] { return InclusionProbabilities::make(*fixed_pis, ProbabilitySource::fixed, options.clamp_floor); },
                    pi_error);
    } else if (out.models.hazard) {
      pis = attempt([&] { return model_inclusion_probabilities(*out.models.hazard, portfolio, ctx, options.clamp_floor); },
                    pi_error);
    } else {
      pi_error = hazard_error;
    }
  }

  // frequency model
  Reason lambda_error;
  std::vector<double> lambda;
  if (need_lambda) {
    if (!out.models.hazard) {
      lambda_error = hazard_error;
    } else {
      auto ok = attempt(
          [&] {
            const auto& hz = *out.models.hazard;
            const bool integrate =
                options.count_severity == CountSeverity::integrated && hz.spec.severity_effect != SeverityEffect::none;
            if (integrate) {
              if (reuse && reuse->population) {
                out.models.population = reuse->population;
              } else {
                const auto all = model_inclusion_probabilities(hz, portfolio, ctx, options.clamp_floor);
                std::vector<double> w;
                for (double v : all.values()) w.push_back(1.0 / v);
                out.models.population = fit_lognormal(portfolio, reported, w);
              }
            }
            std::vector<double> p(pols.size(), 0.0);
            parallel_for(pols.size(), options.threads, [&](std::size_t j) {
              if (!(pols[j].contract_start < tau)) return;
              std::optional<LogSeverityLaw> law;
              if (integrate) {
                const auto& b = out.models.population->beta;
                double mean = b[0];
                for (std::size_t k = 0; k < pols[j].covariates.size(); ++k) mean += b[k + 1] * pols[j].covariates[k];
                law = LogSeverityLaw{mean, out.models.population->sigma};
              }
              p[j] = average_inclusion_probability(hz, pols[j].covariates, tau, pols[j].contract_start,
                                                   pols[j].contract_end, law ? &*law : nullptr);
            });
            out.frequency_data = make_frequency_data(portfolio, ctx, p);
            if (reuse && reuse->frequency) out.models.frequency = reuse->frequency;
            else out.models.frequency = fit_zinb(*out.frequency_data, options.frequency);
            out.laws = ibnr_laws(*out.models.frequency, *out.frequency_data);
            for (const auto& l : out.laws) lambda.push_back(expected_ibnr_count(l));
            return true;
          },
          lambda_error);
      if (!ok) lambda.clear();
    }
  }

  // severity models
  Reason plain_error, wbp_error, weighted_error;
  if (need_plain || wants(estimators, {K::ml_wbp})) {
    if (reuse && reuse->plain) out.models.plain = reuse->plain;
    else out.models.plain = attempt([&] { return fit_lognormal(portfolio, reported); }, plain_error);
  }
  if (wants(estimators, {K::ml_wbp})) {
    if (reuse && reuse->wbp) out.models.wbp = reuse->wbp;
    else if (!out.models.plain) wbp_error = plain_error;
    else if (!pis) wbp_error = pi_error;
    else out.models.wbp = attempt([&] { return calibrate_wbp(*out.models.plain, portfolio, reported, *pis, options.balance); }, wbp_error);
  }
  if (wants(estimators, {K::ml_wl})) {
    if (reuse && reuse->weighted) {
      out.models.weighted = reuse->weighted;
    } else if (!pis) {
      weighted_error = pi_error;
    } else {
      out.models.weighted = attempt(
          [&] {
            auto capped = cap_weights(odds_weights(*pis), options.weight_cap_quantile);
            out.models.capped_weights = capped.capped;
            auto m = fit_lognormal(portfolio, reported, capped.weights);
            if (capped.capped > 0)
              m.diagnostics.warnings.push_back(std::to_string(capped.capped) + " weights capped at " +
                                               format_real(capped.cap));
            return m;
          },
          weighted_error);
    }
  }

  // chain ladder
  Reason cl_error;
  std::optional<ChainLadderResult> cl;
  if (need_cl) {
    cl = attempt([&] { return chain_ladder(build_triangle(portfolio, ctx, options.triangle_width, options.triangle_origin)); },
                 cl_error);
  }

  auto policy_predictions = [&](const SeverityModel& m) {
    std::vector<double> v;
    v.reserve(out.frequency_data->policy_idx.size());
    for (auto j : out.frequency_data->policy_idx) v.push_back(m.predict_mean(pols[j].covariates));
    return v;
  };
  auto fail = [&](K k, const Reason& why) { out.failures.push_back({to_string(k), why.text, why.kind}); };
  const bool have_lambda = need_lambda && lambda_error.empty() && out.frequency_data;

  for (auto k : estimators) {
    Reason err;
    std::optional<ReserveEstimate> est;
    switch (k) {
      case K::cl:
        if (cl) est = cl->estimate;
        else err = cl_error;
        break;
      case K::ipw:
        if (!pis) {
          err = pi_error;
          break;
        }
        est = attempt(
            [&] {
              auto e = ipw_reserve(y, *pis);
              if (options.bootstrap) {
                auto b = bootstrap_reserve(y, *pis, options.bootstrap_replicates, options.bootstrap_seed,
                                           options.bootstrap_level, options.threads);
                e.interval = b.interval;
              }
              return e;
            },
            err);
        break;
      case K::aipw:
        if (!pis) err = pi_error;
        else if (!have_lambda) err = lambda_error;
        else if (!out.models.plain) err = plain_error;
        else
          est = attempt(
              [&] {
                const double total = ml_reserve(lambda, policy_predictions(*out.models.plain)).point;
                return aipw_reserve(y, predict_claims(*out.models.plain, portfolio, reported), total, *pis);
              },
              err);
        break;
      case K::aipw_cl:
        if (!cl) err = cl_error;
        else if (!have_lambda) err = lambda_error;
        else if (!out.models.plain) err = plain_error;
        else
          est = attempt(
              [&] {
                const auto cpis = cohort_probabilities(portfolio, ctx, *cl, options.triangle_width, options.triangle_origin);
                const double total = ml_reserve(lambda, policy_predictions(*out.models.plain)).point;
                return aipw_cl_reserve(y, predict_claims(*out.models.plain, portfolio, reported), total, cpis);
              },
              err);
        break;
      case K::ml:
      case K::cred:
      case K::ml_wbp:
      case K::ml_wl: {
        const SeverityModel* m = nullptr;
        if (k == K::ml_wbp) {
          m = out.models.wbp ? &*out.models.wbp : nullptr;
          err = wbp_error;
        } else if (k == K::ml_wl) {
          m = out.models.weighted ? &*out.models.weighted : nullptr;
          err = weighted_error;
        } else {
          m = out.models.plain ? &*out.models.plain : nullptr;
          err = plain_error;
        }
        if (!have_lambda) {
          err = lambda_error;
          break;
        }
        if (!m) break;
        err.clear();
        auto e = ml_reserve(lambda, policy_predictions(*m), to_string(k));
        if (k != K::cred) {
          est = e;
          break;
        }
        if (!cl) {
          err = cl_error;
          break;
        }
        est = attempt(
            [&] {
              const double reported_total = std::accumulate(cl->latest.begin(), cl->latest.end(), 0.0);
              const double cl_ultimate = reported_total + cl->estimate.point;
              if (!(cl_ultimate > 0.0)) throw EstimatorUndefined("credibility: no reported amount");
              return credibility_reserve(cl_ultimate, reported_total + e.point, options.credibility_z,
                                         reported_total / cl_ultimate);
            },
            err);
        break;
      }
    }
    if (est) {
      out.estimates.push_back(std::move(*est));
    } else {
      fail(k, err.empty() ? Reason{"unavailable"} : err);
    }
  }
  out.pis = std::move(pis);
  return out;
}

CountSeverity parse_count_severity(const std::string& name) {
  if (name == "median") return CountSeverity::median;
  if (name == "integrated") return CountSeverity::integrated;
  throw InvalidArgument("unknown count severity mode '" + name + "' (median|integrated)");
}

const char* to_string(CountSeverity mode) noexcept {
  return mode == CountSeverity::integrated ? "integrated" : "median";
}

RefitPolicy parse_refit_policy(const std::string& name) {
  if (name == "every-date") return RefitPolicy::every_date;
  if (name == "once") return RefitPolicy::once;
  throw InvalidArgument("unknown refit policy '" + name + "' (every-date|once)");
}

const char* to_string(RefitPolicy policy) noexcept { return policy == RefitPolicy::once ? "once" : "every-date"; }

void summarize(BacktestReport& report) {
  report.summary.clear();
  report.best.clear();
  for (const auto& name : report.estimators) {
    std::vector<double> truth, est;
    for (const auto& row : report.rows) {
      if (!row.truth) continue;
      for (const auto& e : row.estimates) {
        if (e.label == name) {
          truth.push_back(*row.truth);
          est.push_back(e.point);
        }
      }
    }
    if (truth.empty()) continue;
    report.summary.push_back({name, metrics(truth, est)});
  }
  if (report.summary.empty()) return;
  auto pick = [&](const char* metric, auto key) {
    const EstimatorSummary* best = nullptr;
    double best_v = 0.0;
    for (const auto& s : report.summary) {
      const auto v = key(s.metrics);
      if (!v) continue;
      if (!best || *v < best_v) {
        best = &s;
        best_v = *v;
      }
    }
    if (best) report.best.emplace_back(metric, best->estimator);
  };
  pick("ME", [](const Metrics& m) { return std::optional<double>(std::abs(m.me)); });
  pick("MAE", [](const Metrics& m) { return std::optional<double>(m.mae); });
  pick("RMSE", [](const Metrics& m) { return std::optional<double>(m.rmse); });
  pick("MAPE", [](const Metrics& m) { return m.mape; });
}

BacktestReport backtest(const Portfolio& portfolio, std::span<const double> grid,
                        std::span<const EstimatorKind> estimators, RefitPolicy refit, const PipelineOptions& options,
                        bool truth_known) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw InvalidArgument("backtest: valuation grid must be strictly increasing");
  BacktestReport report;
  for (auto k : estimators) report.estimators.emplace_back(to_string(k));
  std::optional<FittedModels> first;
  for (double tau : grid) {
    auto eval = evaluate_date(portfolio, tau, estimators, options, first ? &*first : nullptr);
    if (refit == RefitPolicy::once && !first) first = eval.models;
    BacktestRow row;
    row.tau = tau;
    if (truth_known) row.truth = realized_truth(portfolio, tau).ibnr_liability;
    row.estimates = std::move(eval.estimates);
    row.failures = std::move(eval.failures);
    report.rows.push_back(std::move(row));
  }
  summarize(report);
  return report;
}

namespace {

Json metrics_json(const Metrics& m) {
  Json j;
  j["n"] = m.n;
  j["ME"] = m.me;
  j["MAE"] = m.mae;
  j["RMSE"] = m.rmse;
  j["MAPE"] = m.mape ? Json(*m.mape) : Json(nullptr);
  return j;
}

Json estimate_json(const ReserveEstimate& e) {
  Json j;
  j["estimator"] = e.label;
  j["point"] = e.point;
  j["model_term"] = e.model_term;
  j["augmentation_term"] = e.augmentation_term;
  j["ipw_term"] = e.ipw_term;
  j["min_pi"] = e.min_pi;
  j["max_pi"] = e.max_pi;
  j["clamped"] = e.clamped;
  if (e.interval) {
    j["interval"] = {{"lo", e.interval->lo},
                     {"hi", e.interval->hi},
                     {"level", e.interval->level},
                     {"method", e.interval->method}};
  }
  return j;
}

}  // namespace

Json to_json(const BacktestReport& report) {
  Json j;
  j["estimators"] = report.estimators;
  j["metric_convention"] = "error = truth - estimate";
  auto& rows = j["rows"] = Json::array();
  for (const auto& r : report.rows) {
    Json row;
    row["valuation_date"] = r.tau;
    row["truth"] = r.truth ? Json(*r.truth) : Json(nullptr);
    row["estimates"] = Json::array();
    for (const auto& e : r.estimates) row["estimates"].push_back(estimate_json(e));
    row["failures"] = Json::array();
    for (const auto& f : r.failures)
      row["failures"].push_back({{"estimator", f.estimator}, {"kind", to_string(f.kind)}, {"reason", f.reason}});
    rows.push_back(std::move(row));
  }
  auto& summary = j["metrics"] = Json::object();
  for (const auto& s : report.summary) summary[s.estimator] = metrics_json(s.metrics);
  auto& best = j["best"] = Json::object();
  for (const auto& [metric, name] : report.best) best[metric] = name;
  return j;
}

std::string backtest_rows_csv(const BacktestReport& report) {
  std::ostringstream out;
  out << "valuation_date,estimator,point,model_term,augmentation_term,interval_lo,interval_hi,truth\n";
  for (const auto& r : report.rows) {
    for (const auto& e : r.estimates) {
      std::ostringstream line;
      write_estimate_row(line, r.tau, e);
      std::string s = line.str();
      s.pop_back();
      out << s << ',' << (r.truth ? format_real(*r.truth) : std::string()) << '\n';
    }
  }
  return out.str();
}

std::string backtest_metrics_csv(const BacktestReport& report) {
  std::ostringstream out;
  out << "estimator,n,ME,MAE,RMSE,MAPE,best\n";
  for (const auto& s : report.summary) {
    std::string best;
    for (const auto& [metric, name] : report.best) {
      if (name != s.estimator) continue;
      if (!best.empty()) best += ';';
      best += metric;
    }
    out << s.estimator << ',' << s.metrics.n << ',' << format_real(s.metrics.me) << ',' << format_real(s.metrics.mae)
        << ',' << format_real(s.metrics.rmse) << ',' << (s.metrics.mape ? format_real(*s.metrics.mape) : "") << ','
        << best << '\n';
  }
  return out.str();
}

std::string backtest_plot_csv(const BacktestReport& report) {
  std::ostringstream out;
  out << "valuation_date,series,value\n";
  for (const auto& r : report.rows) {
    if (r.truth) out << format_real(r.tau) << ",truth," << format_real(*r.truth) << '\n';
    for (const auto& e : r.estimates) out << format_real(r.tau) << ',' << e.label << ',' << format_real(e.point) << '\n';
  }
  return out.str();
}

double InclusionProfile::operator()(double elapsed) const {
  if (edges.empty() || edges.size() != values.size()) throw InvalidArgument("inclusion profile: one value per edge is required");
  auto it = std::upper_bound(edges.begin(), edges.end(), elapsed);
  const auto k = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
  return values[k];
}

IdentityReport validate_ipw_identity(const SimConfig& config, double tau, std::size_t replicates,
                                     const InclusionProfile& profile, unsigned threads) {
  config.validate();
  if (replicates < 2) throw InvalidArgument("validate_ipw_identity: at least 2 replicates are required");
  if (!(tau > 0.0)) throw InvalidArgument("validate_ipw_identity: tau must be > 0");
  if (profile.empty()) {
    const bool homogeneous = config.delay.gamma == 0.0 &&
                             std::all_of(config.delay.coef.begin(), config.delay.coef.end(), [](double c) { return c == 0.0; });
    if (!homogeneous) throw InvalidArgument("validate_ipw_identity: delay model must depend on time only");
  } else {
    check_bin_edges(profile.edges);
    if (profile.values.size() != profile.edges.size()) throw InvalidArgument("inclusion profile: one value per edge is required");
    for (double v : profile.values)
      if (!(v > 0.0 && v <= 1.0)) throw InvalidArgument("inclusion profile: values must lie in (0, 1]");
  }
  const auto policies = draw_policies(config);
  std::vector<double> lhs(replicates, 0.0), rhs(replicates, 0.0), diff(replicates, 0.0);
  parallel_for(replicates, threads, [&](std::size_t r) {
    const auto claims = draw_claims(config, policies, r + 1);
    double l = 0.0, w = 0.0;
    for (std::size_t i = 0; i < claims.size(); ++i) {
      const auto& c = claims[i];
      if (c.accident_time > tau) continue;
      double pi;
      bool reported;
      if (profile.empty()) {
        pi = true_inclusion_probability(config, policies[c.policy].covariates, c.severity, c.accident_time, tau);
        reported = c.report_time() <= tau;
      } else {
        pi = profile(tau - c.accident_time);
        auto rng = CounterRng::substream(config.seed, report_stream, r + 1, c.policy, c.ordinal);
        reported = rng.uniform_open() < pi;
      }
      if (reported) w += odds_ratio(pi) * c.severity;
      else l += c.severity;
    }
    lhs[r] = l;
    rhs[r] = w;
    diff[r] = l - w;
  });
  IdentityReport rep;
  rep.replicates = replicates;
  rep.lhs_mean = mean_se(lhs).mean;
  rep.rhs_mean = mean_se(rhs).mean;
  const auto d = mean_se(diff);
  rep.gap = d.mean;
  rep.standard_error = d.se;
  rep.relative_gap = rep.lhs_mean != 0.0 ? rep.gap / rep.lhs_mean : 0.0;
  rep.z = d.se > 0.0 ? d.mean / d.se : 0.0;
  return rep;
}

std::vector<RobustnessCell> double_robustness_grid(const SimConfig& config, const RobustnessOptions& o) {
  config.validate();
  if (o.replicates < 2) throw InvalidArgument("double_robustness_grid: at least 2 replicates are required");
  if (config.delay.gamma != 0.0)
    throw InvalidArgument("double_robustness_grid: severity must not affect reporting (gamma = 0)");
  const double tau = o.tau;
  const auto policies = draw_policies(config);
  const auto n = policies.size();

  std::vector<PolicyExpectation> expect(n);
  parallel_for(n, o.threads, [&](std::size_t j) { expect[j] = expected_ibnr(config, policies[j], tau); });
  double truth = 0.0, biased_total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    truth += expect[j].ibnr_liability;
    biased_total += o.severity_bias * expected_severity(config, policies[j].covariates) * expect[j].ibnr_count;
  }
  if (!(truth > 0.0)) throw InvalidArgument("double_robustness_grid: expected IBNR liability is zero");

  // distorted probabilities: cohort means of the oracle values on a pilot replicate
  const auto cohorts = period_count(tau, 0.0, o.cohort_width);
  std::vector<double> cohort_sum(cohorts, 0.0), cohort_n(cohorts, 0.0);
  double all_sum = 0.0, all_n = 0.0;
  for (const auto& c : draw_claims(config, policies, pilot_replicate, o.threads)) {
    if (c.accident_time > tau || c.report_time() > tau) continue;
    const auto k = static_cast<std::size_t>(period_of(c.accident_time, 0.0, o.cohort_width));
    const double pi = true_inclusion_probability(config, policies[c.policy].covariates, c.severity, c.accident_time, tau);
    cohort_sum[k] += pi;
    cohort_n[k] += 1.0;
    all_sum += pi;
    all_n += 1.0;
  }
  std::vector<double> distorted(cohorts);
  for (std::size_t k = 0; k < cohorts; ++k) {
    const double mean = cohort_n[k] > 0.0 ? cohort_sum[k] / cohort_n[k] : all_sum / std::max(1.0, all_n);
    distorted[k] = std::clamp(o.distortion * mean, o.clamp_floor, 1.0);
  }

  // per replicate: ipw[pi], aug[pi][sev]
  struct Rep {
    double ipw[2] = {0, 0};
    double aug[2][2] = {{0, 0}, {0, 0}};
  };
  std::vector<Rep> reps(o.replicates);
  parallel_for(o.replicates, o.threads, [&](std::size_t r) {
    Rep acc;
    for (const auto& c : draw_claims(config, policies, r + 1)) {
      if (c.accident_time > tau || c.report_time() > tau) continue;
      const auto& x = policies[c.policy].covariates;
      const double pi_o = std::max(o.clamp_floor, true_inclusion_probability(config, x, c.severity, c.accident_time, tau));
      const double pi_d = distorted[static_cast<std::size_t>(period_of(c.accident_time, 0.0, o.cohort_width))];
      const double w[2] = {odds_ratio(pi_o), odds_ratio(pi_d)};
      const double mean = expected_severity(config, x);
      const double yhat[2] = {mean, o.severity_bias * mean};
      for (int p = 0; p < 2; ++p) {
        acc.ipw[p] += w[p] * c.severity;
        for (int s = 0; s < 2; ++s) acc.aug[p][s] += w[p] * (c.severity - yhat[s]);
      }
    }
    reps[r] = acc;
  });

  std::vector<RobustnessCell> cells;
  const double model_total[2] = {truth, biased_total};
  for (int p = 0; p < 2; ++p) {
    for (int s = 0; s < 2; ++s) {
      RobustnessCell cell;
      cell.pi = p == 0 ? PiSource::oracle : PiSource::distorted;
      cell.severity = s == 0 ? SeveritySource::unbiased : SeveritySource::biased;
      cell.truth = truth;
      std::vector<double> aipw, ipw;
      for (const auto& rp : reps) {
        aipw.push_back(model_total[s] + rp.aug[p][s]);
        ipw.push_back(rp.ipw[p]);
      }
      const auto a = mean_se(aipw);
      const auto i = mean_se(ipw);
      cell.aipw_mean = a.mean;
      cell.ipw_mean = i.mean;
      cell.ml_mean = model_total[s];
      cell.aipw_bias = (a.mean - truth) / truth;
      cell.ipw_bias = (i.mean - truth) / truth;
      cell.ml_bias = (model_total[s] - truth) / truth;
      cell.aipw_se = a.se / truth;
      cell.ipw_se = i.se / truth;
      cell.ml_se = 0.0;
      cells.push_back(cell);
    }
  }
  return cells;
}

Json to_json(const IdentityReport& r) {
  Json j;
  j["replicates"] = r.replicates;
  j["lhs_mean"] = r.lhs_mean;
  j["rhs_mean"] = r.rhs_mean;
  j["gap"] = r.gap;
  j["relative_gap"] = r.relative_gap;
  j["standard_error"] = r.standard_error;
  j["z"] = r.z;
  return j;
}

Json to_json(std::span<const RobustnessCell> cells) {
  Json arr = Json::array();
  for (const auto& c : cells) {
    Json j;
    j["pi"] = c.pi == PiSource::oracle ? "oracle" : "distorted";
    j["severity"] = c.severity == SeveritySource::unbiased ? "oracle-unbiased" : "biased";
    j["truth"] = c.truth;
    j["aipw"] = {{"mean", c.aipw_mean}, {"relative_bias", c.aipw_bias}, {"relative_se", c.aipw_se}};
    j["ipw"] = {{"mean", c.ipw_mean}, {"relative_bias", c.ipw_bias}, {"relative_se", c.ipw_se}};
    j["ml"] = {{"mean", c.ml_mean}, {"relative_bias", c.ml_bias}, {"relative_se", c.ml_se}};
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace ibnr
