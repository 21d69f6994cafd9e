#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "renormlab/error.hpp"

namespace renormlab::fitting {

// Aitken delta-squared extrapolation: the last well-conditioned
// accelerated value of the sequence. Differences below the caller's
// floor are treated as converged noise and stop the acceleration.
template <typename Real>
Real aitken(const std::vector<Real>& s, Real floor) {
  using std::abs;
  if (s.size() < 3) throw error("fitting.short_sequence", "need 3 terms");
  Real best = s.back();
  for (std::size_t i = 0; i + 2 < s.size(); ++i) {
    Real d1 = s[i + 1] - s[i];
    Real d2 = s[i + 2] - s[i + 1];
    Real den = d2 - d1;
    if (abs(d2) < floor || abs(den) < floor) break;
    best = s[i + 2] - d2 * d2 / den;
  }
  return best;
}

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  std::size_t n = 0;
};

// Least squares y = a + b x with the coefficient of determination.
inline LinearFit linear_fit(const std::vector<double>& x,
                            const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw error("fitting.short_sequence", "need 2 matched samples");
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double den = n * sxx - sx * sx;
  if (den == 0) throw error("fitting.degenerate", "constant abscissa");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  f.n = x.size();
  double ss_res = 0, ss_tot = 0, mean = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  f.r2 = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return f;
}

// Fit y_i = C mu^i over the index window [lo, hi]; returns (log fit,
// C, mu). y must be positive on the window.
struct GeometricFit {
  double c = 0;
  double mu = 0;
  double r2 = 0;
};

inline GeometricFit geometric_fit(const std::vector<double>& y,
                                  std::size_t lo, std::size_t hi) {
  if (hi >= y.size() || lo + 1 >= hi)
    throw error("fitting.window", "bad fit window");
  std::vector<double> xs, ys;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (!(y[i] > 0))
      throw error("fitting.domain", "geometric fit needs positive data");
    xs.push_back(static_cast<double>(i));
    ys.push_back(std::log(y[i]));
  }
  LinearFit f = linear_fit(xs, ys);
  return {std::exp(f.intercept), std::exp(f.slope), f.r2};
}

}  // namespace renormlab::fitting
