#include "wbpost/report.hpp"

#include <cmath>
#include <cstdio>

namespace wbpost {

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json quantile_object(const Quantiles& q) {
  Json out = Json::object();
  for (std::size_t i = 0; i < kReportProbs.size(); ++i) {
    char key[16];
    std::snprintf(key, sizeof key, "q%g", kReportProbs[i]);
    out[key] = number(q.values[i]);
  }
  return out;
}

}  // namespace

Json to_json(const PriorSpec& prior) {
  return Json{{"r", prior.r()},
              {"q", prior.q()},
              {"p", prior.p()},
              {"parametrization", to_string(prior.parametrization())}};
}

Json to_json(const DatasetSummary& s) {
  return Json{{"n", s.n},
              {"m", s.m},
              {"distinct_uncensored", s.distinct_uncensored},
              {"x_max", s.x_max},
              {"sum_delta_log_x", s.sum_delta_log_x},
              {"h", s.h}};
}

Json to_json(const ProprietyVerdict& v) {
  Json out{{"status", to_string(v.status)},
           {"theorem_item", v.theorem_item_tag()},
           {"condition", v.condition}};
  if (v.gap_note) out["gap_note"] = *v.gap_note;
  return out;
}

Json to_json(const MomentVerdict& m) {
  return Json{{"parameter", to_string(m.parameter)},
              {"order", m.order},
              {"status", to_string(m.status)}};
}

Json moment_table(const PriorSpec& prior, const DatasetSummary& summary) {
  Json rows = Json::array();
  for (auto param : {MomentParameter::eta, MomentParameter::theta, MomentParameter::beta})
    for (double k : {1.0, 2.0}) rows.push_back(to_json(moment_finiteness(prior, summary, param, k)));
  return rows;
}

Json to_json(const ConvergenceReport& r) {
  Json sums = Json::array();
  for (double v : r.panel_log_sums) sums.push_back(number(v));
  Json out{{"classification", to_string(r.classification)},
           {"empirical", r.empirical},
           {"evidence", r.evidence},
           {"first_panel", r.first_panel},
           {"panel_log_sums", sums}};
  if (r.inner_threshold) out["inner_threshold"] = number(*r.inner_threshold);
  return out;
}

Json to_json(const LogNormalizingConstant& c) {
  return Json{{"log_d", c.log_d},
              {"abs_log_error_estimate", c.abs_log_error_estimate},
              {"panels_used", c.panels_used},
              {"provenance", "quadrature"}};
}

Json to_json(const PosteriorReport& rep) {
  Json beta = Json::object();
  if (rep.beta.mean) beta["mean"] = *rep.beta.mean;
  if (rep.beta.mcse_mean) beta["mcse_mean"] = *rep.beta.mcse_mean;
  if (rep.beta.sd) beta["sd"] = *rep.beta.sd;
  beta["quantiles"] = quantile_object(rep.beta.quantiles);
  if (!rep.beta.warnings.empty()) beta["warnings"] = rep.beta.warnings;

  Json eta{{"quantiles", quantile_object(rep.eta.quantiles)}, {"warning", rep.eta.warning}};
  Json theta{{"quantiles", quantile_object(rep.theta.quantiles)},
             {"warning", rep.theta.warning}};

  const auto& d = rep.diagnostics;
  Json diag{{"split_rhat", {{"log_eta", d.rhat_log_eta}, {"log_beta", d.rhat_log_beta}}},
            {"ess", {{"log_eta", d.ess_log_eta}, {"log_beta", d.ess_log_beta}, {"beta", d.ess_beta}}},
            {"acceptance", d.acceptance}};

  Json out{{"provenance", "mcmc"},
           {"draws", rep.draws},
           {"beta", beta},
           {"eta", eta},
           {"theta", theta},
           {"diagnostics", diag}};
  if (rep.tail_note) out["tail_note"] = *rep.tail_note;
  return out;
}

}  // namespace wbpost
