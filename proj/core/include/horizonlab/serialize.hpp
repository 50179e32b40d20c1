#pragma once

// JSON and CSV encodings of controls, trajectories and reports.
// Non-finite reals are written as the strings "inf", "-inf" and "nan".

#include "horizonlab/gammalab.hpp"
#include "horizonlab/pattern.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace horizonlab {

using Json = nlohmann::ordered_json;

Json real_json(double v);
/// Accepts numbers and the strings "inf", "-inf", "+inf", "nan".
double real_from_json(const Json& j);
/// Shortest round-trip decimal ("inf", "-inf", "nan" for non-finite values).
std::string format_real(double v);

Json to_json(const Vec& v);
Json to_json(const Mat& m);
Vec vec_from_json(const Json& j);
/// Rows of equal length.
Mat mat_from_json(const Json& j);

/// {breakpoints: [...], values: [[...], ...], tail: [...]}
Json to_json(const PiecewiseControl& u);
/// Strict: exactly the three keys above.
PiecewiseControl control_from_json(const Json& j);

/// Header `t,<names>` (default x1..xn), one row per node, footer
/// `# escape_time=<t>` when the solution escaped.
void write_trajectory_csv(std::ostream& os, const Trajectory& x, const std::vector<std::string>& names = {});

Json to_json(const CostBreakdown& c);
Json to_json(const PmpResiduals& r);
Json to_json(const ConditionReport& r);
Json to_json(const SingleSwitchResult& r);
Json to_json(const RelaxedResult& r);
Json to_json(const VaccinationResult& r);
Json to_json(const NpiSolution& s);
Json to_json(const NpiReport& r);
Json to_json(const ConvergenceReport& r);
Json to_json(const PatternRecord& r);
/// Summary without the per-record rows: classes, gaps, tau_infinity, partial flag.
Json to_json(const SweepResult& r);
Json to_json(const CertificationReport& r);
Json to_json(const ClosureReport& r);
Json to_json(const BlowupReport& r);
Json to_json(const TailsReport& r);
Json to_json(const LiminfReport& r);

/// `T,tau_1..tau_N,cost,weierstrass,hamvar`; NPI sweeps append
/// `arc3_mode,max_arc_dev`. Failed rows carry empty fields.
void write_sweep_csv(std::ostream& os, const SweepResult& r, const std::string& arc3_mode = {});

} // namespace horizonlab
