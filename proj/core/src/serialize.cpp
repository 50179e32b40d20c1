#include "horizonlab/serialize.hpp"

#include "horizonlab/types.hpp"

#include <charconv>
#include <limits>
#include <cmath>
#include <ostream>

namespace horizonlab {

Json real_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double real_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ConfigError("expected a real number, got " + j.dump());
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(real_json(v(i)));
  return a;
}

Json to_json(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Vec(m.row(r).transpose())));
  return a;
}

Vec vec_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a non-empty array of reals");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = real_from_json(j[i]);
  return v;
}

Mat mat_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a matrix as a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Vec first = vec_from_json(j[0]);
  Mat m(rows, first.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vec row = vec_from_json(j[static_cast<std::size_t>(r)]);
    if (row.size() != first.size()) throw ConfigError("matrix rows must have equal length");
    m.row(r) = row.transpose();
  }
  return m;
}

Json to_json(const PiecewiseControl& u) {
  Json j;
  Json bp = Json::array();
  for (double t : u.breakpoints()) bp.push_back(real_json(t));
  Json vals = Json::array();
  for (const auto& v : u.values()) vals.push_back(to_json(v));
  j["breakpoints"] = std::move(bp);
  j["values"] = std::move(vals);
  j["tail"] = to_json(u.tail());
  return j;
}

PiecewiseControl control_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("control must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "breakpoints" && key != "values" && key != "tail") throw ConfigError("unknown control key '" + key + "'");
  }
  if (!j.contains("breakpoints") || !j.contains("values") || !j.contains("tail"))
    throw ConfigError("control needs breakpoints, values and tail");
  std::vector<double> bp;
  for (const auto& t : j.at("breakpoints")) bp.push_back(real_from_json(t));
  if (!j.at("values").is_array()) throw ConfigError("control values must be an array");
  std::vector<Vec> vals;
  for (const auto& v : j.at("values")) vals.push_back(vec_from_json(v));
  return PiecewiseControl(std::move(bp), std::move(vals), vec_from_json(j.at("tail")));
}

void write_trajectory_csv(std::ostream& os, const Trajectory& x, const std::vector<std::string>& names) {
  const auto n = x.states.rows();
  if (!names.empty() && static_cast<Eigen::Index>(names.size()) != n)
    throw ConfigError("trajectory CSV needs one column name per state");
  os << 't';
  for (Eigen::Index i = 0; i < n; ++i) {
    os << ',' << (names.empty() ? "x" + std::to_string(i + 1) : names[static_cast<std::size_t>(i)]);
  }
  os << '\n';
  for (std::size_t k = 0; k < x.grid.size(); ++k) {
    os << format_real(x.grid[k]);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_real(x.states(i, static_cast<Eigen::Index>(k)));
    os << '\n';
  }
  if (x.escape_time) os << "# escape_time=" << format_real(*x.escape_time) << '\n';
}

Json to_json(const CostBreakdown& c) {
  Json j;
  j["running"] = real_json(c.running);
  j["tail"] = real_json(c.tail);
  j["total"] = real_json(c.total());
  j["violation"] = {{"kind", to_string(c.violation.kind)},
                    {"time", c.violation.time ? real_json(*c.violation.time) : Json(nullptr)}};
  return j;
}

Json to_json(const PmpResiduals& r) {
  return {{"weierstrass_violation", real_json(r.weierstrass_violation)},
          {"hamiltonian_rel_var", real_json(r.hamiltonian_rel_var)},
          {"phi_zero_crossings", r.phi_zero_crossings}};
}

Json to_json(const ConditionReport& r) {
  Json j;
  j["type"] = to_string(r.type);
  j["verdict"] = to_string(r.verdict);
  j["sampling_verdict"] = to_string(r.sampling_verdict);
  j["finsler_holds"] = r.finsler_holds;
  j["witness"] = r.witness ? to_json(*r.witness) : Json(nullptr);
  j["finsler_mu"] =
      r.finsler_mu ? Json::array({real_json(r.finsler_mu->first), real_json(r.finsler_mu->second)}) : Json(nullptr);
  j["finsler_lambda"] = Json::array({real_json(r.finsler_lambda.first), real_json(r.finsler_lambda.second)});
  j["near_null_samples"] = r.near_null_samples;
  j["min_margin"] = real_json(r.min_margin);
  j["definite_null_form"] = r.definite_null_form;
  j["commutator_norm"] = real_json(r.commutator_norm);
  return j;
}

Json to_json(const SingleSwitchResult& r) {
  return {{"tau", real_json(r.tau)},
          {"cost", real_json(r.cost)},
          {"flat_objective", r.flat_objective},
          {"evaluations", r.evaluations}};
}

Json to_json(const RelaxedResult& r) {
  Json vals = Json::array();
  for (double v : r.values) vals.push_back(real_json(v));
  return {{"cost", real_json(r.cost)},
          {"gradient_norm", real_json(r.gradient_norm)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"values", std::move(vals)}};
}

Json to_json(const VaccinationResult& r) {
  return {{"tau1", real_json(r.tau1)},       {"cost", real_json(r.cost)},   {"feasible", r.feasible},
          {"max_i", real_json(r.max_i)},     {"slack", real_json(r.slack)}, {"evaluations", r.evaluations}};
}

Json to_json(const NpiSolution& s) {
  return {{"arc3_mode", to_string(s.control.mode)},
          {"tau1", real_json(s.control.tau1)},
          {"tau2", real_json(s.control.tau2)},
          {"tau3", real_json(s.control.tau3)},
          {"cost", real_json(s.cost)},
          {"feasible", s.feasible},
          {"max_i", real_json(s.max_i)},
          {"arc_max_dev", real_json(s.arc_max_dev)},
          {"saturates", s.saturates},
          {"evaluations", s.evaluations}};
}

Json to_json(const NpiReport& r) {
  Json j;
  j["feedback_keep_iM"] = to_json(r.feedback);
  j["formula_as_printed"] = to_json(r.printed);
  j["saturating_mode"] = r.saturating ? Json(to_string(*r.saturating)) : Json(nullptr);
  return j;
}

Json to_json(const ConvergenceReport& r) {
  Json gaps = Json::array();
  for (double g : r.gaps) gaps.push_back(real_json(g));
  return {{"indices", r.indices},
          {"gaps", std::move(gaps)},
          {"monotone_decreasing", r.monotone_decreasing},
          {"extrapolated_limit", r.extrapolated_limit ? real_json(*r.extrapolated_limit) : Json(nullptr)}};
}

Json to_json(const PatternRecord& r) {
  Json taus = Json::array();
  for (double t : r.taus) taus.push_back(real_json(t));
  Json j;
  j["T"] = real_json(r.T);
  j["taus"] = std::move(taus);
  j["values"] = r.values;
  j["cost"] = real_json(r.cost);
  j["feasible"] = r.feasible;
  j["flat_objective"] = r.flat_objective;
  j["residuals"] = r.residuals ? to_json(*r.residuals) : Json(nullptr);
  if (r.arc_max_dev) j["arc_max_dev"] = real_json(*r.arc_max_dev);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

Json to_json(const SweepResult& r) {
  Json j;
  j["kind"] = r.kind;
  Json hs = Json::array();
  for (const auto& rec : r.records) hs.push_back(real_json(rec.T));
  j["horizons"] = std::move(hs);
  Json taus = Json::array();
  for (std::size_t k = 0; k < r.classes.size(); ++k) {
    taus.push_back({{"index", k + 1},
                    {"class", to_string(r.classes[k])},
                    {"tau_infinity", real_json(r.tau_infinity[k])},
                    {"convergence", to_json(r.diagnostics[k])}});
  }
  j["taus"] = std::move(taus);
  j["partial"] = r.partial;
  return j;
}

Json to_json(const CertificationReport& r) {
  Json j;
  j["kind"] = r.kind;
  j["T_cert"] = real_json(r.T_cert);
  Json tau = Json::array();
  for (double t : r.tau_infinity) tau.push_back(real_json(t));
  j["tau_infinity"] = std::move(tau);
  j["extrapolated_cost"] = real_json(r.extrapolated_cost);
  j["tail_bound"] = r.tail_bound ? real_json(*r.tail_bound) : Json(nullptr);
  j["tail_unknown"] = r.tail_unknown;
  j["best_competitor"] = real_json(r.best_competitor);
  j["relaxed_rel_diff"] = r.relaxed_rel_diff ? real_json(*r.relaxed_rel_diff) : Json(nullptr);
  Json probe = Json::array();
  for (const auto& [lo, hi] : r.local_probe) probe.push_back(Json::array({real_json(lo), real_json(hi)}));
  j["local_probe"] = std::move(probe);
  j["local_minimum"] = r.local_minimum;
  Json comp = Json::array();
  for (const auto& c : r.competitors) comp.push_back({{"label", c.label}, {"cost", real_json(c.cost)}});
  j["competitors"] = std::move(comp);
  j["certified"] = r.certified;
  j["note"] = r.note;
  return j;
}

Json to_json(const ClosureReport& r) {
  Json a = Json::array();
  for (std::size_t i = 0; i < r.ks.size(); ++i) {
    a.push_back({{"k", r.ks[i]},
                 {"gap", real_json(r.gaps[i])},
                 {"escape_time", r.escape_times[i] ? real_json(*r.escape_times[i]) : Json(nullptr)}});
  }
  return {{"members", std::move(a)}, {"monotone_decreasing", r.report.monotone_decreasing}};
}

Json to_json(const BlowupReport& r) {
  Json a = Json::array();
  for (const auto& e : r.entries) {
    a.push_back({{"rate", real_json(e.rate)},
                 {"escape_time", e.escape_time ? real_json(*e.escape_time) : Json(nullptr)},
                 {"relative_error", real_json(e.relative_error)}});
  }
  return {{"pulses", std::move(a)}, {"limit_global", r.limit_global}, {"limit_max_dev", real_json(r.limit_max_dev)}};
}

Json to_json(const TailsReport& r) {
  Json a = Json::array();
  for (const auto& e : r.entries) {
    a.push_back({{"T_k", real_json(e.T_k)},
                 {"gap", real_json(e.gap_replaced)},
                 {"gap_without_replacement", real_json(e.gap_original)}});
  }
  return a;
}

Json to_json(const LiminfReport& r) {
  Json rows = Json::array();
  for (std::size_t k = 0; k < r.horizons.size(); ++k) {
    rows.push_back({{"T_k", real_json(r.horizons[k])},
                    {"member_cost", real_json(r.member_costs[k])},
                    {"admissible", static_cast<bool>(r.admissible[k])},
                    {"recovery_cost", real_json(r.recovery_costs[k])}});
  }
  return {{"members", std::move(rows)},
          {"f_infinity", real_json(r.f_infinity)},
          {"tail_bound", r.tail_bound ? real_json(*r.tail_bound) : Json(nullptr)},
          {"liminf_margin", real_json(r.liminf_margin)},
          {"liminf_holds", r.liminf_holds},
          {"recovery_holds", r.recovery_holds}};
}

void write_sweep_csv(std::ostream& os, const SweepResult& r, const std::string& arc3_mode) {
  const std::size_t m = r.classes.size();
  const bool npi = r.kind == "sir_npi";
  os << 'T';
  for (std::size_t j = 0; j < m; ++j) os << ",tau_" << j + 1;
  os << ",cost,weierstrass,hamvar";
  if (npi) os << ",arc3_mode,max_arc_dev";
  os << '\n';
  for (const auto& rec : r.records) {
    os << format_real(rec.T);
    for (std::size_t j = 0; j < m; ++j) os << ',' << (j < rec.taus.size() ? format_real(rec.taus[j]) : "");
    const bool ok = rec.error.empty();
    os << ',' << (ok ? format_real(rec.cost) : "");
    os << ',' << (rec.residuals ? format_real(rec.residuals->weierstrass_violation) : "");
    os << ',' << (rec.residuals ? format_real(rec.residuals->hamiltonian_rel_var) : "");
    if (npi) os << ',' << arc3_mode << ',' << (rec.arc_max_dev ? format_real(*rec.arc_max_dev) : "");
    os << '\n';
  }
}

} // namespace horizonlab
