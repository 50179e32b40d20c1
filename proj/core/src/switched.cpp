#include "horizonlab/switched.hpp"

#include "horizonlab/dynamics.hpp"
#include "horizonlab/optimize.hpp"
#include "horizonlab/pmp.hpp"
#include "horizonlab/quadrature.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>

namespace horizonlab {

namespace {

double norm2(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

double lambda_min(const Mat& m) { return Eigen::SelfAdjointEigenSolver<Mat>(sym(m), Eigen::EigenvaluesOnly).eigenvalues()(0); }

struct GramExp {
  Mat W;  // int_0^L e^{A^T s} e^{A s} ds
  Mat E;  // e^{A L}
};

GramExp gramian_exp(const Mat& A, double L) {
  const Eigen::Index n = A.rows();
  if (L <= 0.0) return {Mat::Zero(n, n), Mat::Identity(n, n)};
  Mat M = Mat::Zero(2 * n, 2 * n);
  M.topLeftCorner(n, n) = -A.transpose();
  M.topRightCorner(n, n) = Mat::Identity(n, n);
  M.bottomRightCorner(n, n) = A;
  const Mat E = expm(M * L);
  GramExp g{E.bottomRightCorner(n, n).transpose() * E.topRightCorner(n, n), E.bottomRightCorner(n, n)};
  g.W = sym(g.W);
  return g;
}

std::pair<const Mat*, const Mat*> modes(const SwitchedPair& pair, SwitchType type) {
  return type == SwitchType::OneZero ? std::pair{&pair.A1(), &pair.A2()} : std::pair{&pair.A2(), &pair.A1()};
}

} // namespace

SwitchedPair::SwitchedPair(Mat A1, Mat A2) : A1_(std::move(A1)), A2_(std::move(A2)) {
  if (A1_.rows() == 0 || A1_.rows() != A1_.cols() || A2_.rows() != A2_.cols() || A1_.rows() != A2_.rows())
    throw ConfigError("switched pair: matrices must be square, non-empty and of equal size");
  if (!A1_.allFinite() || !A2_.allFinite()) throw ConfigError("switched pair: non-finite entries");
}

double SwitchedPair::commutator_norm() const { return norm2(A1_ * A2_ - A2_ * A1_); }

bool SwitchedPair::commutes() const { return commutator_norm() <= 1e-10 * (1.0 + norm2(A1_) * norm2(A2_)); }

std::string to_string(SwitchType t) { return t == SwitchType::OneZero ? "one_zero" : "zero_one"; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Vacuous: return "vacuous";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

SwitchType parse_switch_type(const std::string& s) {
  if (s == "one_zero") return SwitchType::OneZero;
  if (s == "zero_one") return SwitchType::ZeroOne;
  throw ConfigError("unknown switch type '" + s + "' (expected one_zero or zero_one)");
}

ConditionForms condition_forms(const SwitchedPair& pair, SwitchType type) {
  ConditionForms f;
  f.S = sym(pair.A1() - pair.A2());
  const double sg = type == SwitchType::OneZero ? 1.0 : -1.0;
  f.Q1 = sg * sym(f.S * pair.A1());
  f.Q2 = sg * sym(f.S * pair.A2());
  return f;
}

Mat sphere_points(Eigen::Index n, std::size_t count) {
  if (n < 1) throw ConfigError("sphere_points: dimension must be positive");
  // generalized golden ratio: positive root of x^(n+1) = x + 1
  double phi = 2.0;
  for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(n + 1));
  Vec alpha(n);
  for (Eigen::Index j = 0; j < n; ++j) alpha(j) = std::fmod(std::pow(1.0 / phi, static_cast<double>(j + 1)), 1.0);

  Mat X(n, static_cast<Eigen::Index>(count));
  constexpr double lo = 1e-15;
  for (std::size_t k = 0; k < count; ++k) {
    Vec g(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double p = std::fmod(0.5 + static_cast<double>(k + 1) * alpha(j), 1.0);
      p = std::clamp(p, lo, 1.0 - lo);
      g(j) = std::sqrt(2.0) * boost::math::erf_inv(2.0 * p - 1.0);
    }
    const double nrm = g.norm();
    if (nrm == 0.0) g = Vec::Unit(n, 0);
    else g /= nrm;
    X.col(static_cast<Eigen::Index>(k)) = g;
  }
  return X;
}

std::pair<double, double> finsler_search(const Mat& Q, const Mat& S, double mu_max, std::size_t grid) {
  auto neg = [&](double mu) { return -lambda_min(Q + mu * S); };
  const auto r = grid_then_golden(neg, -mu_max, mu_max, {std::max<std::size_t>(grid, 3), 1e-12 * (1.0 + mu_max)});
  return {r.x, -r.value};
}

ConditionReport check_condition(const SwitchedPair& pair, SwitchType type, const ConditionOptions& opt) {
  ConditionReport rep;
  rep.type = type;
  rep.commutator_norm = pair.commutator_norm();
  const auto f = condition_forms(pair, type);
  const Eigen::Index n = pair.dim();

  const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(f.S, Eigen::EigenvaluesOnly).eigenvalues();
  const double stol = 1e-12 * (1.0 + ev.cwiseAbs().maxCoeff());
  rep.definite_null_form = ev(0) > stol || ev(n - 1) < -stol;

  // sampling route
  const double qscale = std::max({1.0, norm2(f.Q1), norm2(f.Q2)});
  const double margin = opt.zero_band * qscale;
  const Mat X = sphere_points(n, opt.sphere_samples);
  double worst = kInf;
  for (Eigen::Index k = 0; k < X.cols(); ++k) {
    const Vec x = X.col(k);
    if (std::abs(x.dot(f.S * x)) >= opt.zero_band) continue;
    ++rep.near_null_samples;
    const double q = std::min(x.dot(f.Q1 * x), x.dot(f.Q2 * x));
    rep.min_margin = std::min(rep.min_margin, q);
    if (q < margin && q < worst) {
      worst = q;
      rep.witness = x;
    }
  }
  if (rep.witness) rep.sampling_verdict = Verdict::Fails;
  else if (rep.near_null_samples == 0) rep.sampling_verdict = Verdict::Vacuous;
  else rep.sampling_verdict = Verdict::Inconclusive;

  // Finsler route
  const double mu1_max = 10.0 * (1.0 + norm2(f.S * pair.A1()));
  const double mu2_max = 10.0 * (1.0 + norm2(f.S * pair.A2()));
  const auto [mu1, l1] = finsler_search(f.Q1, f.S, mu1_max, opt.finsler_grid);
  const auto [mu2, l2] = finsler_search(f.Q2, f.S, mu2_max, opt.finsler_grid);
  rep.finsler_lambda = {l1, l2};
  const double ltol = 1e-10 * qscale;
  rep.finsler_holds = l1 > ltol && l2 > ltol;
  if (rep.finsler_holds) rep.finsler_mu = std::pair{mu1, mu2};

  if (rep.definite_null_form) rep.verdict = Verdict::Vacuous;
  else if (rep.finsler_holds) rep.verdict = Verdict::Holds;
  else rep.verdict = rep.sampling_verdict;
  return rep;
}

Mat gramian(const Mat& A, double L) { return gramian_exp(A, L).W; }

double single_switch_cost(const SwitchedPair& pair, SwitchType type, const Vec& x0, double T, double tau) {
  tau = std::clamp(tau, 0.0, T);
  const auto [F, G] = modes(pair, type);
  const auto first = gramian_exp(*F, tau);
  const Vec y = first.E * x0;
  const Mat W2 = gramian(*G, T - tau);
  return 0.5 * (x0.dot(first.W * x0) + y.dot(W2 * y));
}

double single_switch_cost_derivative(const SwitchedPair& pair, SwitchType type, const Vec& x0, double T, double tau) {
  tau = std::clamp(tau, 0.0, T);
  const auto [F, G] = modes(pair, type);
  const Vec y = expm(*F * tau) * x0;
  const auto second = gramian_exp(*G, T - tau);
  return 0.5 * y.squaredNorm() + y.dot(second.W * (*F * y)) - 0.5 * (second.E * y).squaredNorm();
}

PiecewiseControl single_switch_control(SwitchType type, double tau) {
  const double first = type == SwitchType::OneZero ? 1.0 : 0.0;
  const double second = 1.0 - first;
  if (std::isinf(tau)) return PiecewiseControl::constant(first);
  if (!(tau >= 0.0)) throw ConfigError("single_switch_control: switching time must be >= 0");
  return PiecewiseControl({0.0, tau}, {Vec::Constant(1, first)}, Vec::Constant(1, second));
}

SingleSwitchResult optimize_single_switch(const SwitchedPair& pair, SwitchType type, const Vec& x0, double T,
                                          const SingleSwitchOptions& opt) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("optimize_single_switch: horizon must be positive");
  if (x0.size() != pair.dim()) throw ConfigError("optimize_single_switch: initial state has wrong dimension");
  SingleSwitchResult r;
  if (x0.squaredNorm() == 0.0) {
    r.flat_objective = true;
    return r;
  }
  auto J = [&](double tau) {
    ++r.evaluations;
    return single_switch_cost(pair, type, x0, T, tau);
  };
  auto dJ = [&](double tau) { return single_switch_cost_derivative(pair, type, x0, T, tau); };

  const std::size_t n = std::max<std::size_t>(opt.coarse_points, 64);
  double jmin = kInf, jmax = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = J(T * static_cast<double>(i) / static_cast<double>(n - 1));
    jmin = std::min(jmin, v);
    jmax = std::max(jmax, v);
  }
  if (jmax - jmin <= 1e-14 * (1.0 + std::abs(jmax))) {
    r.flat_objective = true;
    r.tau = 0.0;
    r.cost = J(0.0);
    return r;
  }

  auto best = grid_then_golden(J, 0.0, T, {n, opt.xtol});
  const double h = T / static_cast<double>(n - 1);
  const double lo = std::max(0.0, best.x - h), hi = std::min(T, best.x + h);
  if (dJ(lo) < 0.0 && dJ(hi) > 0.0) {
    const double root = bisect_root(dJ, lo, hi, 1e-15 * (1.0 + T));
    const double jr = J(root);
    if (jr <= best.value + 1e-13 * (1.0 + std::abs(best.value))) best = {root, jr, best.evaluations};
  }
  // endpoints are candidates of their own; snap when the slope points outward
  if (best.x <= h && dJ(0.0) >= 0.0) {
    const double j0 = J(0.0);
    if (j0 <= best.value + 1e-13 * (1.0 + std::abs(best.value))) best = {0.0, j0, best.evaluations};
  }
  if (best.x >= T - h && dJ(T) <= 0.0) {
    const double jT = J(T);
    if (jT <= best.value + 1e-13 * (1.0 + std::abs(best.value))) best = {T, jT, best.evaluations};
  }
  r.tau = best.x;
  r.cost = best.value;
  return r;
}

double piecewise_cost(const SwitchedPair& pair, const Vec& x0, double T, const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("piecewise_cost: no intervals");
  const double h = T / static_cast<double>(values.size());
  const Mat B2 = pair.B2();
  Vec x = x0;
  double J = 0.0;
  for (double u : values) {
    const auto g = gramian_exp(pair.A2() + u * B2, h);
    J += 0.5 * x.dot(g.W * x);
    x = g.E * x;
  }
  return J;
}

std::vector<double> relaxed_gradient(const SwitchedPair& pair, const Vec& x0, double T, const std::vector<double>& values,
                                     const IntegratorConfig& cfg) {
  const std::size_t N = values.size();
  const auto u = PiecewiseControl::uniform(T, values, values.back());
  const auto an = analyze_switched(pair.B1(), pair.B2(), u, x0, T, cfg);
  const auto& t = an.phi.t;
  std::vector<double> g(N);
  const auto& bp = u.breakpoints();
  std::size_t a = 0;
  for (std::size_t j = 0; j < N; ++j) {
    std::size_t b = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), bp[j + 1] - 1e-12 * T) - t.begin());
    b = std::min(b, t.size() - 1);
    g[j] = simpson(std::span(t).subspan(a, b - a + 1), std::span(an.phi.phi).subspan(a, b - a + 1));
    a = b;
  }
  return g;
}

namespace {

double projected_gradient_norm(const std::vector<double>& u, const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double d = u[j] - std::clamp(u[j] - g[j], 0.0, 1.0);
    s += d * d;
  }
  return std::sqrt(s);
}

} // namespace

RelaxedResult relaxed_direct_solve(const SwitchedPair& pair, const Vec& x0, double T, std::size_t N,
                                   const IntegratorConfig& cfg, const RelaxedOptions& opt) {
  if (N < 2) throw ConfigError("relaxed_direct_solve: need at least two intervals");
  if (!(T > 0.0)) throw ConfigError("relaxed_direct_solve: horizon must be positive");
  std::vector<double> u(N, 0.5);
  double J = piecewise_cost(pair, x0, T, u);
  std::vector<double> g = relaxed_gradient(pair, x0, T, u, cfg);
  double pg = projected_gradient_norm(u, g);

  double gmax = 0.0;
  for (double v : g) gmax = std::max(gmax, std::abs(v));
  double alpha = gmax > 0.0 ? 0.5 / gmax : 1.0;

  RelaxedResult r{PiecewiseControl::constant(0.5), {}, J, pg, 0, false};
  std::size_t it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (pg <= opt.tol * (1.0 + J)) {
      r.converged = true;
      break;
    }
    std::vector<double> trial(N);
    double Jt = kInf;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      double dec = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        trial[j] = std::clamp(u[j] - alpha * g[j], 0.0, 1.0);
        dec += g[j] * (trial[j] - u[j]);
      }
      Jt = piecewise_cost(pair, x0, T, trial);
      if (Jt <= J + 1e-4 * dec) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    std::vector<double> gt = relaxed_gradient(pair, x0, T, trial, cfg);
    double ss = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      const double s = trial[j] - u[j], y = gt[j] - g[j];
      ss += s * s;
      sy += s * y;
    }
    alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : std::min(alpha * 4.0, 1e12);
    u.swap(trial);
    g.swap(gt);
    J = Jt;
    pg = projected_gradient_norm(u, g);
  }
  r.iterations = it;
  r.values = u;
  r.cost = J;
  r.gradient_norm = pg;
  r.control = PiecewiseControl::uniform(T, u, u.back());
  return r;
}

} // namespace horizonlab
