#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "renormlab/contfrac.hpp"
#include "renormlab/error.hpp"
#include "renormlab/precision.hpp"

namespace renormlab::map {

template <typename Real>
struct Harmonic {
  Real a;  // coefficient of sin(2 pi k x)
  Real b;  // coefficient of cos(2 pi k x) - 1
};

// Lift of an analytic critical circle map,
//   lift(x) = x + theta + sum_k a_k sin(2 pi k x) + b_k (cos(2 pi k x) - 1),
// validated at construction to be a monotone degree-one lift with a
// cubic critical point at 0. theta acts as a pure translation.
template <typename Real>
class CircleMap {
 public:
  CircleMap(Real theta, std::vector<Harmonic<Real>> harmonics)
      : theta_(theta), harmonics_(std::move(harmonics)) {
    validate();
  }

  Real theta() const { return theta_; }
  const std::vector<Harmonic<Real>>& harmonics() const { return harmonics_; }

  CircleMap with_theta(Real t) const {
    CircleMap m(*this);
    m.theta_ = t;
    return m;
  }

  // order-th derivative of the lift at x (order 0..3).
  Real eval(Real x, int order = 0) const {
    using std::cos;
    using std::sin;
    if (order < 0 || order > 3)
      throw error("circlemap.order", "derivative order must be 0..3");
    const Real two_pi = 2 * pi_v<Real>();
    Real acc = 0;
    for (std::size_t k = 1; k <= harmonics_.size(); ++k) {
      const auto& h = harmonics_[k - 1];
      Real w = two_pi * Real(static_cast<double>(k));
      Real s = sin(w * x), c = cos(w * x);
      switch (order) {
        case 0: acc += h.a * s + h.b * (c - 1); break;
        case 1: acc += w * (h.a * c - h.b * s); break;
        case 2: acc += w * w * (-h.a * s - h.b * c); break;
        case 3: acc += w * w * w * (-h.a * c + h.b * s); break;
      }
    }
    switch (order) {
      case 0: return x + theta_ + acc;
      case 1: return Real(1) + acc;
      default: return acc;
    }
  }

  Real lift(Real x) const { return eval(x, 0); }

  // Orbit point kept as (fractional part, integer part) so deep iterates
  // keep full precision: lift(frac + n) = n + frac + P(frac).
  struct Orbit {
    Real frac;          // in [0,1)
    std::int64_t whole;
    Real unreduced() const { return frac + Real(static_cast<double>(whole)); }
  };

  Orbit start(Real x) const {
    using std::floor;
    Real fl = floor(x);
    return {x - fl, static_cast<std::int64_t>(static_cast<double>(fl))};
  }

  void step(Orbit& o) const {
    using std::floor;
    Real y = o.frac + theta_ + periodic(o.frac);
    Real fl = floor(y);
    o.frac = y - fl;
    o.whole += static_cast<std::int64_t>(static_cast<double>(fl));
  }

  // lift^n(x) - p, evaluated without precision loss from large iterates.
  Real iterate(Real x, std::int64_t n, std::int64_t p = 0) const {
    Orbit o = start(x);
    for (std::int64_t i = 0; i < n; ++i) step(o);
    return o.frac + Real(static_cast<double>(o.whole - p));
  }

  // d/dx lift^n(x) by the chain rule.
  Real iterate_derivative(Real x, std::int64_t n) const {
    Orbit o = start(x);
    Real d = 1;
    for (std::int64_t i = 0; i < n; ++i) {
      d *= eval(o.frac, 1);
      step(o);
    }
    return d;
  }

 private:
  Real periodic(Real xfrac) const {
    using std::cos;
    using std::sin;
    const Real two_pi = 2 * pi_v<Real>();
    Real acc = 0;
    for (std::size_t k = 1; k <= harmonics_.size(); ++k) {
      const auto& h = harmonics_[k - 1];
      Real w = two_pi * Real(static_cast<double>(k));
      acc += h.a * sin(w * xfrac);
      if (h.b != 0) acc += h.b * (cos(w * xfrac) - 1);
    }
    return acc;
  }

  void validate() const {
    const Real two_pi = 2 * pi_v<Real>();
    Real d1 = 1, d2 = 0, d3 = 0;
    for (std::size_t k = 1; k <= harmonics_.size(); ++k) {
      Real w = two_pi * Real(static_cast<double>(k));
      d1 += w * harmonics_[k - 1].a;
      d2 -= w * w * harmonics_[k - 1].b;
      d3 -= w * w * w * harmonics_[k - 1].a;
    }
    using std::abs;
    const Real tol = Real(1e-12);
    if (abs(d1) > tol || abs(d2) > tol)
      throw error("circlemap.not_cubic",
                  "lift'(0) = " + to_decimal_string(d1) +
                      ", lift''(0) = " + to_decimal_string(d2));
    if (!(d3 > 0))
      throw error("circlemap.negative_third_derivative",
                  "lift'''(0) = " + to_decimal_string(d3));
    check_monotone();
  }

  void check_monotone() const {
    // lift' >= 0 on a 4096-point grid, refined by ternary search where
    // the derivative dips near zero.
    const int n = 4096;
    using std::abs;
    for (int i = 0; i < n; ++i) {
      Real x = Real(i) / Real(n);
      Real d = eval(x, 1);
      if (d < Real(0.05)) {
        Real lo = Real(i - 1) / Real(n), hi = Real(i + 1) / Real(n);
        for (int it = 0; it < 80; ++it) {
          Real m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
          if (eval(m1, 1) < eval(m2, 1))
            hi = m2;
          else
            lo = m1;
        }
        d = eval((lo + hi) / 2, 1);
      }
      if (d < Real(-1e-12))
        throw error("circlemap.not_monotone",
                    "lift' < 0 near x = " + to_decimal_string(x));
    }
  }

  Real theta_;
  std::vector<Harmonic<Real>> harmonics_;
};

// One-parameter family with fixed harmonics; theta sweeps [0,1).
// Validation (the harmonic constraints and the monotonicity grid) does
// not depend on theta, so it runs once here and at() is then cheap —
// parameter root-finding calls it thousands of times.
template <typename Real>
class MapFamily {
 public:
  MapFamily(std::string name, std::vector<Harmonic<Real>> harmonics)
      : name_(std::move(name)), base_(Real(0), std::move(harmonics)) {}

  const std::string& name() const { return name_; }
  const std::vector<Harmonic<Real>>& harmonics() const {
    return base_.harmonics();
  }

  CircleMap<Real> at(Real theta) const { return base_.with_theta(theta); }

 private:
  std::string name_;
  CircleMap<Real> base_;
};

// Canonical member: K = 1, a_1 = -1/(2 pi), b_1 = 0.
template <typename Real>
MapFamily<Real> arnold_cubic() {
  return MapFamily<Real>("arnold-cubic",
                         {{Real(-1) / (2 * pi_v<Real>()), Real(0)}});
}

// Two-harmonic variant keeping the cubic constraint:
// a_1 = -(1-eps)/(2 pi), a_2 = -eps/(4 pi).
template <typename Real>
MapFamily<Real> two_harmonic(Real eps) {
  return MapFamily<Real>("two-harmonic",
                         {{-(Real(1) - eps) / (2 * pi_v<Real>()), Real(0)},
                          {-eps / (4 * pi_v<Real>()), Real(0)}});
}

template <typename Real>
CircleMap<Real> build_map(Real theta, std::vector<Harmonic<Real>> harmonics) {
  return CircleMap<Real>(theta, std::move(harmonics));
}

// ---------------------------------------------------------------------------
// Rotation number machinery.

struct DigitStream {
  std::vector<std::int64_t> digits;
  bool rational = false;       // combinatorics terminated (height infinity)
  std::size_t rational_level = 0;  // level at which it terminated
  bool exhausted = false;      // iteration/precision cap reached first
};

namespace detail {

// Height-style digit extraction directly on the lift: r_0 counts the
// steps of the critical orbit before it first wraps past 1; deeper
// digits count eta-steps of the level-m return pair, where
// eta = lift^{q_{m+1}} - p_{m+1} and xi = lift^{q_m} - p_m.
template <typename Real>
DigitStream rotation_digits(const CircleMap<Real>& map, std::size_t depth,
                            std::int64_t step_cap = 1'000'000) {
  using std::abs;
  DigitStream out;
  const Real stall = 64 * machine_eps<Real>();
  // Bootstrap digit r_0.
  {
    typename CircleMap<Real>::Orbit o = map.start(Real(0));
    map.step(o);
    if (o.whole >= 1 || (o.frac == 0 && o.whole == 0)) {
      // lift(0) >= 1 cannot happen for theta in [0,1); lift(0) == 0
      // means a fixed critical point, rho = 0.
      out.rational = true;
      return out;
    }
    Real prev = o.frac;
    std::int64_t k = 1;
    while (o.whole < 1) {
      map.step(o);
      ++k;
      if (o.whole < 1 && abs(o.frac - prev) < stall) {
        out.rational = true;  // converging to a fixed point below 1
        return out;
      }
      prev = o.frac;
      if (k > step_cap) {
        out.exhausted = true;
        return out;
      }
    }
    out.digits.push_back(k - 1);
  }
  // Deeper digits from return-pair heights.
  std::int64_t q_lo = 1, p_lo = 0;                    // (q_m, p_m)
  std::int64_t q_hi = out.digits[0], p_hi = 1;        // (q_{m+1}, p_{m+1})
  for (std::size_t m = 1; m < depth; ++m) {
    // xi(0) = lift^{q_lo}(0) - p_lo; its sign alternates with m. The
    // digit is the number of eta-steps before the sign flips.
    Real x = map.iterate(Real(0), q_lo, p_lo);
    if (x == 0) {  // exact critical cycle at the previous level
      out.rational = true;
      out.rational_level = m;
      return out;
    }
    const bool positive_side = x > 0;
    const Real noise = stall * Real(static_cast<double>(q_hi));
    std::int64_t r = 0;
    std::int64_t budget = step_cap;
    bool crossed = false;
    bool exact = false;
    Real prev = x;
    while (budget-- > 0) {
      Real y = map.iterate(x, q_hi, p_hi);
      if (y == 0) {
        // xi(0) lands exactly on 0 after r+1 eta-steps: the rotation
        // number is exactly the next convergent.
        crossed = true;
        exact = true;
        ++r;
        break;
      }
      if (positive_side ? y < 0 : y > 0) {
        crossed = true;
        break;
      }
      if (abs(y - prev) < noise) {
        // Stalled orbit: a genuine eta-fixed-point (rational lock) still
        // has a resolvable translation eta(0); otherwise precision died.
        Real eta0 = map.iterate(Real(0), q_hi, p_hi);
        if (abs(eta0) > 1000 * noise) {
          out.rational = true;
          out.rational_level = m;
        } else {
          out.exhausted = true;
        }
        return out;
      }
      prev = y;
      x = y;
      ++r;
    }
    if (!crossed || r == 0) {
      out.exhausted = true;
      return out;
    }
    std::int64_t digit = r;
    out.digits.push_back(digit);
    if (exact) {
      out.rational = true;
      out.rational_level = m + 1;
      return out;
    }
    std::int64_t q_next = digit * q_hi + q_lo;
    std::int64_t p_next = digit * p_hi + p_lo;
    q_lo = q_hi;
    p_lo = p_hi;
    q_hi = q_next;
    p_hi = p_next;
  }
  return out;
}

}  // namespace detail

template <typename Real>
struct RotationNumber {
  Real rho = 0;
  bool rational = false;
  bool accuracy_flag = false;  // max_iter hit before tol reached
  std::vector<std::int64_t> digits;
};

// rho(f) with |error| <= tol, via continued-fraction digits of the
// critical orbit (convergent p/q has error below 1/q^2).
template <typename Real>
RotationNumber<Real> rotation_number(const CircleMap<Real>& map, Real tol,
                                     std::int64_t max_iter = 50'000'000) {
  if (!(tol > 0)) throw error("circlemap.tol", "tol must be positive");
  RotationNumber<Real> out;
  std::int64_t spent = 0;
  std::size_t depth = 4;
  cf::int128 q_prev = 1;
  while (true) {
    auto ds = detail::rotation_digits(map, depth, max_iter - spent);
    if (ds.rational) {
      out.rational = true;
      out.digits = ds.digits;
      if (ds.digits.empty()) {
        out.rho = 0;
        return out;
      }
      auto conv = cf::convergents(cf::ContinuedFraction(ds.digits),
                                  ds.digits.size());
      out.rho = cf::to_real<Real>(conv.p) / cf::to_real<Real>(conv.q);
      return out;
    }
    out.digits = ds.digits;
    cf::ContinuedFraction c(ds.digits);
    auto conv = cf::convergents(c, ds.digits.size());
    Real q = cf::to_real<Real>(conv.q);
    if (Real(1) / (q * q) <= tol) {
      out.rho = cf::to_real<Real>(conv.p) / q;
      return out;
    }
    if (ds.exhausted || ds.digits.size() < depth) {
      out.accuracy_flag = true;
      out.rho = cf::to_real<Real>(conv.p) / q;
      return out;
    }
    q_prev = conv.q;
    spent += static_cast<std::int64_t>(static_cast<double>(q_prev));
    depth += 4;
    if (depth > 200) {
      out.accuracy_flag = true;
      out.rho = cf::to_real<Real>(conv.p) / q;
      return out;
    }
  }
}

namespace detail {

// Illinois-damped false position for a monotone increasing g with a
// bracketing sign change; falls back to bisection steps when slow.
template <typename Real, typename G>
Real find_root_monotone(G&& g, Real lo, Real hi, Real xtol,
                        int max_eval = 256) {
  Real flo = g(lo), fhi = g(hi);
  if (flo > 0 || fhi < 0)
    throw error("circlemap.unreachable_combinatorics",
                "no sign change in bracket");
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  int side = 0;
  for (int i = 0; i < max_eval && hi - lo > xtol; ++i) {
    Real mid;
    if (i % 4 == 3) {
      mid = lo + (hi - lo) / 2;  // periodic bisection safeguard
    } else {
      mid = (lo * fhi - hi * flo) / (fhi - flo);
      if (!(mid > lo && mid < hi)) mid = lo + (hi - lo) / 2;
    }
    Real fm = g(mid);
    if (fm == 0) return mid;
    if (fm < 0) {
      lo = mid;
      flo = fm;
      if (side == -1) fhi /= 2;
      side = -1;
    } else {
      hi = mid;
      fhi = fm;
      if (side == 1) flo /= 2;
      side = 1;
    }
  }
  return lo + (hi - lo) / 2;
}

}  // namespace detail

// theta with lift_theta^q(0) = p: the combinatorial anchor of the p/q
// tongue. g(theta) = lift_theta^q(0) - p is strictly increasing.
template <typename Real>
Real critical_cycle_parameter(const MapFamily<Real>& family, std::int64_t p,
                              std::int64_t q) {
  if (q <= 0 || p < 0 || p >= q)
    throw error("circlemap.bad_fraction", "need 0 <= p < q");
  if (std::gcd(static_cast<long long>(p), static_cast<long long>(q)) != 1 &&
      p != 0)
    throw error("circlemap.bad_fraction", "p/q must be in lowest terms");
  if (p == 0) return Real(0);  // f(0) = 0 forces theta = 0
  auto g = [&](Real theta) {
    return family.at(theta).iterate(Real(0), q, p);
  };
  Real xtol = 16 * machine_eps<Real>();
  return detail::find_root_monotone(g, Real(0), Real(1) - machine_eps<Real>(),
                                    xtol);
}

// theta whose rotation number matches the first `depth` terms of cf,
// bracketed between consecutive convergent anchors.
template <typename Real>
Real tune_to_rotation(const MapFamily<Real>& family,
                      const cf::ContinuedFraction& target,
                      std::size_t depth) {
  if (depth < 2) throw error("circlemap.depth", "depth must be >= 2");
  auto ca = cf::convergents(target, depth);
  auto cb = cf::convergents(target, depth + 1);
  Real ta = critical_cycle_parameter(
      family, static_cast<std::int64_t>(ca.p),
      static_cast<std::int64_t>(ca.q));
  Real tb = critical_cycle_parameter(
      family, static_cast<std::int64_t>(cb.p),
      static_cast<std::int64_t>(cb.q));
  return (ta + tb) / 2;
}

}  // namespace renormlab::map
