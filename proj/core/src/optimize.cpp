#include "horizonlab/optimize.hpp"

#include "horizonlab/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace horizonlab {

ScalarMinimum golden_section(const ScalarObjective& f, double a, double b, double xtol, std::size_t max_iter) {
  constexpr double inv_phi = 0.6180339887498949;
  ScalarMinimum best{a, kInf, 0};
  auto eval = [&](double x) {
    const double v = f(x);
    ++best.evaluations;
    if (v < best.value) {
      best.x = x;
      best.value = v;
    }
    return v;
  };
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  for (std::size_t it = 0; it < max_iter && (b - a) > xtol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  eval(0.5 * (a + b));
  return best;
}

ScalarMinimum grid_then_golden(const ScalarObjective& f, double a, double b, const GridSearchOptions& opt) {
  const std::size_t n = std::max<std::size_t>(opt.coarse_points, 3);
  std::vector<double> xs(n), fs(n);
  std::size_t ibest = 0;
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    if (i == n - 1) xs[i] = b;
    fs[i] = f(xs[i]);
    if (fs[i] < fs[ibest]) ibest = i;
  }
  ScalarMinimum best{xs[ibest], fs[ibest], n};
  if (!std::isfinite(best.value) || b == a) return best;
  const double lo = xs[ibest == 0 ? 0 : ibest - 1];
  const double hi = xs[std::min(ibest + 1, n - 1)];
  auto refined = golden_section(f, lo, hi, opt.xtol);
  best.evaluations += refined.evaluations;
  if (refined.value < best.value) {
    best.x = refined.x;
    best.value = refined.value;
  }
  return best;
}

double bisect_predicate(const std::function<bool(double)>& pred, double a, double b, double xtol) {
  if (pred(a)) return a;
  while (b - a > xtol) {
    const double m = 0.5 * (a + b);
    if (pred(m)) b = m;
    else a = m;
  }
  return b;
}

double bisect_root(const ScalarObjective& f, double a, double b, double xtol) {
  double fa = f(a);
  if (fa == 0.0) return a;
  for (int it = 0; it < 300 && b - a > xtol; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

} // namespace horizonlab
