#include "report_json.hpp"

#include <cmath>

namespace plap {

namespace {

// JSON has no infinities; they are written as null.
Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json to_json(const GrowthProxy& proxy) {
  Json j;
  j["window_lo"] = number(proxy.window_lo);
  j["window_hi"] = number(proxy.window_hi);
  j["value"] = number(proxy.value);
  j["argmax"] = number(proxy.argmax);
  j["finite"] = proxy.finite;
  return j;
}

Json to_json(const HypothesisReport& report) {
  Json j;
  j["branch"] = to_string(report.branch);
  j["p"] = report.p;
  j["q0"] = report.q0;
  j["count"] = report.count;

  Json assumptions;
  assumptions["f_at_zero"] = number(report.f_at_zero);
  assumptions["inf_F"] = number(report.inf_F);
  assumptions["holds"] = report.assumptions_hold;
  j["assumptions"] = assumptions;

  Json ratios = Json::array();
  for (const auto& row : report.ratios) {
    ratios.push_back(Json{{"k", row.k}, {"a", row.a}, {"b", row.b}, {"ratio", number(row.ratio)}});
  }
  j["ratios"] = Json{{"rows", ratios}, {"holds", report.ratios_hold}};

  Json plateaus = Json::array();
  for (const auto& row : report.plateaus) {
    plateaus.push_back(
        Json{{"k", row.k}, {"max_f", number(row.max_f)}, {"argmax", row.argmax}, {"holds", row.holds}});
  }
  j["plateaus"] = Json{{"rows", plateaus}, {"holds", report.plateaus_hold}};

  Json growth;
  growth["sigma"] = report.sigma;
  growth["threshold"] = report.threshold;
  growth["proxy"] = to_json(report.proxy);
  growth["heuristic"] = true;
  growth["holds"] = report.growth_holds;
  j["growth"] = growth;

  j["all_hold"] = report.all_hold();
  return j;
}

Json to_json(const Certificate& certificate) {
  Json j;
  j["kind"] = to_string(certificate.kind);
  j["branch"] = to_string(certificate.branch);
  Json parameters = Json::object();
  for (const auto& [name, value] : certificate.parameters) parameters[name] = number(value);
  j["parameters"] = parameters;
  Json provenance = Json::object();
  for (const auto& [name, source] : certificate.provenance) provenance[name] = source;
  j["provenance"] = provenance;
  Json rows = Json::array();
  for (const auto& row : certificate.rows) {
    Json values = Json::object();
    for (const auto& [name, value] : row.values) values[name] = number(value);
    rows.push_back(Json{{"k", row.k}, {"values", values}, {"margin", number(row.margin)}, {"holds", row.holds}});
  }
  j["rows"] = rows;
  j["k_star"] = certificate.first_holding_k ? Json(*certificate.first_holding_k) : Json(nullptr);
  j["verdict"] = certificate.verdict;
  return j;
}

Json to_json(const Solution& solution) {
  Json j;
  j["origin"] = to_string(solution.origin);
  j["slope"] = solution.slope;
  j["nodes"] = solution.v.mesh().node_count();
  j["p_norm"] = solution.p_norm;
  j["phi"] = solution.energy.phi;
  j["psi"] = solution.energy.psi;
  j["energy"] = solution.energy.energy;
  j["weak_residual"] = number(solution.weak_res);
  j["sup"] = solution.sup;
  j["min_value"] = solution.min_value;
  return j;
}

}  // namespace plap
