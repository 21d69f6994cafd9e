#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "renormlab/error.hpp"
#include "renormlab/precision.hpp"

namespace renormlab::cheb {

// Barycentric interpolant on Chebyshev points of the second kind,
// mapped to [a, b]. Endpoints are nodes, so interval-end values are
// reproduced exactly; evaluation slightly outside [a, b] degrades
// gracefully (the maps we sample are analytic well past the interval).
template <typename Real>
class Interpolant {
 public:
  Interpolant(Real a, Real b, std::size_t n, const std::function<Real(Real)>& f)
      : a_(a), b_(b) {
    if (n < 2) throw error("chebyshev.nodes", "need at least 2 nodes");
    if (!(a < b)) throw error("chebyshev.domain", "empty interval");
    nodes_.resize(n);
    values_.resize(n);
    using std::cos;
    const Real half = (b - a) / 2, mid = (a + b) / 2;
    const Real pi = pi_v<Real>();
    for (std::size_t j = 0; j < n; ++j) {
      // x_j = cos(pi j / (n-1)), in working precision: the standard
      // (-1)^j barycentric weights assume exact Chebyshev spacing.
      Real t = pi * Real(static_cast<double>(j)) /
               Real(static_cast<double>(n - 1));
      nodes_[j] = mid + half * cos(t);
      values_[j] = f(nodes_[j]);
    }
  }

  Real a() const { return a_; }
  Real b() const { return b_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Real>& nodes() const { return nodes_; }
  const std::vector<Real>& values() const { return values_; }

  Real operator()(Real x) const {
    const std::size_t n = nodes_.size();
    Real num = 0, den = 0;
    int sign = 1;
    for (std::size_t j = 0; j < n; ++j) {
      Real d = x - nodes_[j];
      if (d == 0) return values_[j];
      Real w = Real(sign);
      if (j == 0 || j == n - 1) w /= 2;
      Real t = w / d;
      num += t * values_[j];
      den += t;
      sign = -sign;
    }
    return num / den;
  }

 private:
  Real a_, b_;
  std::vector<Real> nodes_;
  std::vector<Real> values_;
};

}  // namespace renormlab::cheb
