#include "horizonlab/quadrature.hpp"

#include <algorithm>
#include <cassert>

namespace horizonlab {
namespace {

// Integral over [t0, t2] of the quadratic through three nodes.
double pair_integral(double h0, double h1, double f0, double f1, double f2) {
  const double h = h0 + h1;
  return h / 6.0 * ((2.0 - h1 / h0) * f0 + h * h / (h0 * h1) * f1 + (2.0 - h0 / h1) * f2);
}

// Integral over the first panel [t0, t1] of the quadratic through three nodes.
double first_panel(double h0, double h1, double f0, double f1, double f2) {
  const double h = h0 + h1;
  return f0 * h0 * (2.0 * h0 + 3.0 * h1) / (6.0 * h) + f1 * h0 * (h0 + 3.0 * h1) / (6.0 * h1) -
         f2 * h0 * h0 * h0 / (6.0 * h1 * h);
}

// Integral over the last panel [t1, t2] of the quadratic through three nodes.
double last_panel(double h0, double h1, double f0, double f1, double f2) {
  const double h = h0 + h1;
  return -f0 * h1 * h1 * h1 / (6.0 * h0 * h) + f1 * h1 * (h1 + 3.0 * h0) / (6.0 * h0) +
         f2 * h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * h);
}

} // namespace

double simpson(std::span<const double> t, std::span<const double> f) {
  assert(t.size() == f.size());
  const std::size_t n = t.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * (t[1] - t[0]) * (f[0] + f[1]);
  double sum = 0.0;
  std::size_t i = 0;
  for (; i + 2 < n; i += 2) {
    sum += pair_integral(t[i + 1] - t[i], t[i + 2] - t[i + 1], f[i], f[i + 1], f[i + 2]);
  }
  if (i + 1 < n) {
    // one leftover panel [t[n-2], t[n-1]]
    sum += last_panel(t[n - 2] - t[n - 3], t[n - 1] - t[n - 2], f[n - 3], f[n - 2], f[n - 1]);
  }
  return sum;
}

std::vector<double> cumulative_simpson(std::span<const double> t, std::span<const double> f) {
  assert(t.size() == f.size());
  const std::size_t n = t.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  if (n == 2) {
    out[1] = 0.5 * (t[1] - t[0]) * (f[0] + f[1]);
    return out;
  }
  std::size_t i = 0;
  for (; i + 2 < n; i += 2) {
    const double h0 = t[i + 1] - t[i];
    const double h1 = t[i + 2] - t[i + 1];
    out[i + 1] = out[i] + first_panel(h0, h1, f[i], f[i + 1], f[i + 2]);
    out[i + 2] = out[i] + pair_integral(h0, h1, f[i], f[i + 1], f[i + 2]);
  }
  if (i + 1 < n) {
    out[n - 1] = out[n - 2] + last_panel(t[n - 2] - t[n - 3], t[n - 1] - t[n - 2], f[n - 3],
                                         f[n - 2], f[n - 1]);
  }
  return out;
}

std::vector<std::size_t> segment_bounds(std::size_t nodes, std::span<const std::size_t> breaks) {
  std::vector<std::size_t> b;
  if (nodes == 0) return b;
  b.reserve(breaks.size() + 2);
  b.push_back(0);
  for (std::size_t k : breaks) {
    if (k > 0 && k + 1 < nodes) b.push_back(k);
  }
  b.push_back(nodes - 1);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

} // namespace horizonlab
