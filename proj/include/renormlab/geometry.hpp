#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "renormlab/circlemap.hpp"
#include "renormlab/contfrac.hpp"
#include "renormlab/error.hpp"
#include "renormlab/fitting.hpp"
#include "renormlab/pairs.hpp"
#include "renormlab/precision.hpp"

namespace renormlab::geometry {

// ---------------------------------------------------------------------------
// Dynamical partitions: the circle cut at the first q_m + q_{m+1}
// critical orbit points. Each gap is an iterated copy of one of the
// two closest-return intervals.

template <typename Real>
struct DynamicalPartition {
  struct Atom {
    Real start;          // fractional position of the left endpoint
    Real length;
    bool deep;           // true: generation m+1, false: generation m
    std::int64_t index;  // i in f^i(I_m) resp. f^i(I_{m+1})
  };

  std::size_t level = 0;
  std::int64_t q_m = 0, q_m1 = 0;
  std::vector<Atom> atoms;  // sorted by start position

  Real total_length() const {
    // compensated, in index order (deterministic)
    Real sum = 0, carry = 0;
    for (const auto& a : atoms) {
      Real y = a.length - carry;
      Real t = sum + y;
      carry = (t - sum) - y;
      sum = t;
    }
    return sum;
  }
};

template <typename Real>
DynamicalPartition<Real> partition(const map::CircleMap<Real>& f,
                                   std::size_t m) {
  auto ds = map::detail::rotation_digits(f, m + 1);
  if (ds.digits.size() < m + 1)
    throw error("geometry.rational_rotation",
                "rotation combinatorics end before level " +
                    std::to_string(m + 1));
  // q_{-1} = 0, q_0 = 1, q_{k+1} = r_k q_k + q_{k-1}, same for p
  std::int64_t q_lo = 0, q_hi = 1, p_lo = 1, p_hi = 0;
  std::vector<std::int64_t> q{1}, p{0};
  for (std::size_t k = 0; k <= m; ++k) {
    std::int64_t qn = ds.digits[k] * q_hi + q_lo;
    std::int64_t pn = ds.digits[k] * p_hi + p_lo;
    q_lo = q_hi;
    p_lo = p_hi;
    q_hi = qn;
    p_hi = pn;
    q.push_back(q_hi);
    p.push_back(p_hi);
  }
  const std::int64_t qm = q[m], qm1 = q[m + 1], n = qm + qm1;

  // orbit points with their iterate index
  std::vector<std::pair<Real, std::int64_t>> pts(n);
  auto o = f.start(Real(0));
  for (std::int64_t i = 0; i < n; ++i) {
    pts[i] = {o.frac, i};
    f.step(o);
  }
  std::sort(pts.begin(), pts.end());

  // sign of the closest returns (which side of 0 they land on)
  bool m_above = f.iterate(Real(0), qm, p[m]) > 0;
  bool m1_above = f.iterate(Real(0), qm1, p[m + 1]) > 0;
  if (m_above == m1_above)
    throw error("geometry.internal", "closest returns on the same side");

  DynamicalPartition<Real> out;
  out.level = m;
  out.q_m = qm;
  out.q_m1 = qm1;
  Real min_len = 1;
  for (std::int64_t g = 0; g < n; ++g) {
    const auto& a = pts[g];
    const auto& b = pts[(g + 1) % n];
    typename DynamicalPartition<Real>::Atom atom;
    atom.start = a.first;
    atom.length = (g + 1 < n) ? b.first - a.first : Real(1) - a.first + b.first;
    // An atom f^i(I_m) has endpoint indices {i, i + q_m}; whether i is
    // the left one depends on the side of the closest return.
    std::int64_t sA = a.second, sB = b.second;
    if (sB - sA == qm && m_above) {
      atom.deep = false;
      atom.index = sA;
    } else if (sA - sB == qm && !m_above) {
      atom.deep = false;
      atom.index = sB;
    } else if (sB - sA == qm1 && m1_above) {
      atom.deep = true;
      atom.index = sA;
    } else if (sA - sB == qm1 && !m1_above) {
      atom.deep = true;
      atom.index = sB;
    } else {
      throw error("geometry.internal",
                  "gap endpoints are not a closest-return pair");
    }
    min_len = std::min(min_len, atom.length);
    out.atoms.push_back(atom);
  }
  if (min_len < 100 * machine_eps<Real>())
    throw error("geometry.precision",
                "atom length " + to_decimal_string(min_len) +
                    " under the precision floor; use extended precision");
  return out;
}

struct BoundsStats {
  double k_max = 1;
  double k_min = 1e300;
  // counts of adjacent ratios by binary magnitude: hist[k] counts
  // ratios in [2^(k+min_exp), 2^(k+1+min_exp))
  int min_exp = 0;
  std::vector<std::int64_t> hist;
};

template <typename Real>
BoundsStats bounds_stats(const DynamicalPartition<Real>& part) {
  const auto& a = part.atoms;
  std::vector<int> exps;
  BoundsStats out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double u = as_double(a[i].length);
    double v = as_double(a[(i + 1) % a.size()].length);
    double r = u > v ? u / v : v / u;
    out.k_max = std::max(out.k_max, r);
    out.k_min = std::min(out.k_min, r);
    exps.push_back(static_cast<int>(std::floor(std::log2(r))));
  }
  int lo = *std::min_element(exps.begin(), exps.end());
  int hi = *std::max_element(exps.begin(), exps.end());
  out.min_exp = lo;
  out.hist.assign(static_cast<std::size_t>(hi - lo + 1), 0);
  for (int e : exps) ++out.hist[static_cast<std::size_t>(e - lo)];
  return out;
}

// ---------------------------------------------------------------------------
// Closest-return interval lengths and their scaling.

template <typename Real>
std::vector<Real> return_lengths(const map::CircleMap<Real>& f,
                                 std::size_t levels) {
  using std::abs;
  auto ds = map::detail::rotation_digits(f, levels);
  if (ds.digits.size() < levels)
    throw error("geometry.rational_rotation",
                "rotation combinatorics end before level " +
                    std::to_string(levels));
  std::vector<Real> out;
  std::int64_t q_lo = 0, q_hi = 1, p_lo = 1, p_hi = 0;
  for (std::size_t k = 0; k <= levels; ++k) {
    out.push_back(abs(f.iterate(Real(0), q_hi, p_hi)));
    if (k < levels) {
      std::int64_t qn = ds.digits[k] * q_hi + q_lo;
      std::int64_t pn = ds.digits[k] * p_hi + p_lo;
      q_lo = q_hi;
      p_lo = p_hi;
      q_hi = qn;
      p_hi = pn;
    }
  }
  return out;
}

template <typename Real>
struct ScalingRatios {
  std::vector<Real> lengths;  // |I_m|, m = 0..M+1
  std::vector<Real> ratios;   // s_m = |I_{m+1}|/|I_m|, m = 0..M
  Real limit = 0;
  Real drift = 0;  // |s_M - s_{M-1}|
};

template <typename Real>
ScalingRatios<Real> scaling_ratios(const map::CircleMap<Real>& f,
                                   std::size_t M) {
  using std::abs;
  ScalingRatios<Real> out;
  out.lengths = return_lengths(f, M + 1);
  for (std::size_t m = 0; m + 1 < out.lengths.size(); ++m)
    out.ratios.push_back(out.lengths[m + 1] / out.lengths[m]);
  out.limit = fitting::aitken(out.ratios, 100 * machine_eps<Real>());
  auto n = out.ratios.size();
  out.drift = abs(out.ratios[n - 1] - out.ratios[n - 2]);
  return out;
}

// ---------------------------------------------------------------------------
// Piecewise-linear conjugacy matched on partition endpoints.

template <typename Real>
class ConjugacyMap {
 public:
  ConjugacyMap(std::size_t level, std::vector<Real> x, std::vector<Real> y)
      : level_(level), x_(std::move(x)), y_(std::move(y)) {}

  std::size_t level() const { return level_; }
  const std::vector<Real>& breakpoints() const { return x_; }
  const std::vector<Real>& images() const { return y_; }

  // psi(x), degree one: psi(x + 1) = psi(x) + 1.
  Real operator()(Real x) const {
    using std::floor;
    Real fl = floor(x);
    Real fx = x - fl;
    auto it = std::upper_bound(x_.begin(), x_.end(), fx);
    std::size_t hi = static_cast<std::size_t>(it - x_.begin());
    Real x0, x1, y0, y1;
    if (hi == 0 || hi == x_.size()) {
      // the wraparound cell [x_last, x_first + 1)
      x0 = x_.back();
      y0 = y_.back();
      x1 = x_.front() + 1;
      y1 = y_.front() + 1;
      if (hi == 0) fx += 1;
    } else {
      x0 = x_[hi - 1];
      y0 = y_[hi - 1];
      x1 = x_[hi];
      y1 = y_[hi];
    }
    return fl + y0 + (y1 - y0) * (fx - x0) / (x1 - x0);
  }

 private:
  std::size_t level_;
  std::vector<Real> x_, y_;  // matched endpoints, sorted by x, x[0] = 0
};

template <typename Real>
ConjugacyMap<Real> build_conjugacy(const map::CircleMap<Real>& f1,
                                   const map::CircleMap<Real>& f2,
                                   std::size_t m) {
  auto d1 = map::detail::rotation_digits(f1, m + 1);
  auto d2 = map::detail::rotation_digits(f2, m + 1);
  for (std::size_t k = 0; k < m + 1; ++k) {
    if (k >= d1.digits.size() || k >= d2.digits.size() ||
        d1.digits[k] != d2.digits[k])
      throw error("geometry.digit_mismatch",
                  "rotation numbers differ at digit " + std::to_string(k));
  }
  std::int64_t q_lo = 0, q_hi = 1;
  for (std::size_t k = 0; k <= m; ++k) {
    std::int64_t next = d1.digits[k] * q_hi + q_lo;
    q_lo = q_hi;
    q_hi = next;
  }
  std::int64_t n = q_lo + q_hi;  // q_m + q_{m+1}

  std::vector<std::pair<Real, Real>> matched(static_cast<std::size_t>(n));
  auto o1 = f1.start(Real(0));
  auto o2 = f2.start(Real(0));
  for (std::int64_t i = 0; i < n; ++i) {
    matched[static_cast<std::size_t>(i)] = {o1.frac, o2.frac};
    f1.step(o1);
    f2.step(o2);
  }
  std::sort(matched.begin(), matched.end());
  std::vector<Real> xs, ys;
  for (auto& [x, y] : matched) {
    xs.push_back(x);
    ys.push_back(y);
  }
  // Poincare order: the sorted images must be increasing too.
  for (std::size_t i = 0; i + 1 < ys.size(); ++i)
    if (!(ys[i] < ys[i + 1]))
      throw error("geometry.order_mismatch",
                  "orbit orders disagree near breakpoint " +
                      std::to_string(i));
  return ConjugacyMap<Real>(m, std::move(xs), std::move(ys));
}

// ---------------------------------------------------------------------------
// Rigidity-exponent estimate from the matched closest-return lengths.

template <typename Real>
struct RegularityFit {
  std::vector<Real> t;  // t_m = |I_m(f2)| / |I_m(f1)|
  bool exact_identity = false;
  Real s_limit = 1;
  double mu_hat = 0;
  double lambda_hat = 0;
  double alpha_hat = 0;
  double r2 = 0;
  std::size_t window_lo = 0, window_hi = 0;
};

template <typename Real>
RegularityFit<Real> regularity_fit(const map::CircleMap<Real>& f1,
                                   const map::CircleMap<Real>& f2,
                                   std::size_t M) {
  using std::abs;
  if (M < 8) throw error("geometry.window", "need M >= 8");
  RegularityFit<Real> out;
  auto len1 = return_lengths(f1, M);
  auto len2 = return_lengths(f2, M);
  Real worst = 0;
  for (std::size_t m = 0; m <= M; ++m) {
    out.t.push_back(len2[m] / len1[m]);
    worst = std::max(worst, abs(out.t[m] - Real(1)));
  }
  if (worst < 100 * machine_eps<Real>()) {
    out.exact_identity = true;
    out.s_limit = 1;
    return out;
  }
  out.s_limit = fitting::aitken(out.t, 100 * machine_eps<Real>());
  // residuals above the noise floor define the usable window
  std::vector<double> res;
  for (auto& tm : out.t) res.push_back(as_double(abs(tm - out.s_limit)));
  std::size_t hi = res.size();
  while (hi > 0 && res[hi - 1] < 1e-12) --hi;
  if (hi < 5)
    throw error("geometry.window", "usable fit window too short");
  out.window_lo = 1;
  out.window_hi = hi - 1;
  auto gf = fitting::geometric_fit(res, out.window_lo, out.window_hi);
  out.mu_hat = gf.mu;
  out.r2 = gf.r2;
  std::vector<double> l1;
  for (auto& v : len1) l1.push_back(as_double(v));
  out.lambda_hat = fitting::geometric_fit(l1, out.window_lo, out.window_hi).mu;
  out.alpha_hat = std::log(out.mu_hat) / std::log(out.lambda_hat);
  return out;
}

// ---------------------------------------------------------------------------
// Renormalization convergence of two maps with the same combinatorics.

template <typename Real>
struct RenormConvergence {
  std::vector<double> d;  // pair distance at each level
  bool exact_identity = false;
  double c = 0;
  double mu = 0;
  double r2 = 0;
};

template <typename Real>
RenormConvergence<Real> renorm_convergence(const map::CircleMap<Real>& f1,
                                           const map::CircleMap<Real>& f2,
                                           std::size_t N,
                                           std::size_t fit_lo = 4) {
  RenormConvergence<Real> out;
  for (std::size_t n = 0; n <= N; ++n) {
    auto p1 = pairs::CommutingPair<Real>::from_circle_map(f1, n);
    auto p2 = pairs::CommutingPair<Real>::from_circle_map(f2, n);
    out.d.push_back(as_double(pairs::pair_distance(p1, p2)));
  }
  if (*std::max_element(out.d.begin(), out.d.end()) <
      100 * as_double(machine_eps<Real>())) {
    out.exact_identity = true;
    return out;
  }
  auto gf = fitting::geometric_fit(out.d, fit_lo, N);
  out.c = gf.c;
  out.mu = gf.mu;
  out.r2 = gf.r2;
  return out;
}

// ---------------------------------------------------------------------------
// Parameter-scaling probe of the unstable multiplier.

template <typename Real>
struct DeltaEstimate {
  std::vector<Real> theta;    // theta_n at convergent depth n, n = 2..N+1
  std::vector<Real> ratios;   // (theta_n - theta_{n-1})/(theta_{n+1} - theta_n)
  Real delta_hat = 0;         // Aitken limit of |ratios|
  bool truncated = false;     // stopped at the bisection precision floor
};

template <typename Real>
DeltaEstimate<Real> delta_estimate(const map::MapFamily<Real>& fam,
                                   const cf::ContinuedFraction& rho,
                                   std::size_t N) {
  using std::abs;
  if (N < 8) throw error("geometry.window", "need N >= 8");
  DeltaEstimate<Real> out;
  for (std::size_t n = 2; n <= N + 1; ++n) {
    auto c = cf::convergents(rho, n);
    Real th = map::critical_cycle_parameter(fam,
                                            static_cast<std::int64_t>(c.p),
                                            static_cast<std::int64_t>(c.q));
    if (!out.theta.empty() &&
        abs(th - out.theta.back()) < 100 * machine_eps<Real>()) {
      out.truncated = true;
      break;
    }
    out.theta.push_back(th);
  }
  std::vector<Real> mags;
  for (std::size_t i = 0; i + 2 < out.theta.size(); ++i) {
    Real num = out.theta[i + 1] - out.theta[i];
    Real den = out.theta[i + 2] - out.theta[i + 1];
    out.ratios.push_back(num / den);
    mags.push_back(abs(num / den));
  }
  out.delta_hat = fitting::aitken(mags, 100 * machine_eps<Real>());
  return out;
}

// ---------------------------------------------------------------------------
// Cone-field variation recurrence:
//   v_n(x) = lift'(lift^{n-1}(x)) v_{n-1}(x) + v(lift^{n-1}(x)).

template <typename Real>
struct VariationField {
  std::vector<Real> x;
  std::vector<Real> v;
  int scale_exp = 0;  // stored values are v * 2^{-scale_exp}

  Real min_value() const {
    Real m = v.front();
    for (auto& val : v) m = std::min(m, val);
    return m;
  }
};

template <typename Real>
VariationField<Real> propagate_variation(const map::CircleMap<Real>& f,
                                         const std::function<Real(Real)>& v,
                                         std::int64_t n,
                                         std::vector<Real> grid) {
  using std::ldexp;
  if (n < 1) throw error("geometry.window", "need n >= 1");
  VariationField<Real> out;
  out.x = std::move(grid);
  std::vector<int> exps;
  int field_exp = 0;
  for (auto& x0 : out.x) {
    auto o = f.start(x0);
    Real val = v(o.frac);
    int e = 0;
    for (std::int64_t k = 1; k < n; ++k) {
      f.step(o);
      val = f.eval(o.frac, 1) * val + ldexp(v(o.frac), -e);
      if (val > Real(1e280)) {
        val = ldexp(val, -512);
        e += 512;
      }
    }
    out.v.push_back(val);
    exps.push_back(e);
    field_exp = std::max(field_exp, e);
  }
  // rebase every point to the largest exponent seen
  for (std::size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = ldexp(out.v[i], exps[i] - field_exp);
  out.scale_exp = field_exp;
  return out;
}

template <typename Real>
VariationField<Real> propagate_variation(const map::CircleMap<Real>& f,
                                         const std::function<Real(Real)>& v,
                                         std::int64_t n,
                                         std::size_t grid_size = 256) {
  std::vector<Real> grid;
  for (std::size_t j = 0; j < grid_size; ++j)
    grid.push_back(Real(static_cast<double>(j)) /
                   Real(static_cast<double>(grid_size)));
  return propagate_variation(f, v, n, std::move(grid));
}

}  // namespace renormlab::geometry
