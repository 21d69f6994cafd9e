#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "renormlab/chebyshev.hpp"
#include "renormlab/circlemap.hpp"
#include "renormlab/contfrac.hpp"
#include "renormlab/error.hpp"
#include "renormlab/precision.hpp"

namespace renormlab::pairs {

// A commuting pair (eta, xi) in normalized coordinates: xi(0) > 0,
// eta(0) < 0, with I_eta = [0, xi(0)] and I_xi = [eta(0), 0]. Three
// realizations share this interface:
//   * iterate  — eta and xi are return iterates of a circle-map lift
//     (exact up to orbit roundoff, cost grows with the iterate count);
//   * sampled  — Chebyshev interpolants over [eta(0), xi(0)], built
//     either from another pair or by resampling a renormalization
//     (cost per eval is O(nodes), independent of depth);
//   * functional — arbitrary closures, mostly for tests.
//
// Coordinates: pairs derived from a circle map carry a cumulative
// affine factor s ("scale") relating them to the original lift,
// pair(y) = s * raw(y / s). s flips sign at every renormalization, so
// the normalized orientation above holds at every level.
template <typename Real>
class CommutingPair {
 public:
  enum class Kind { iterate, sampled, functional };

  // Level-m return pair of a lift with rotation digits r_0, r_1, ...:
  //   eta = lift^{q_m} - p_m,  xi = lift^{q_{m-1}} - p_{m-1},
  // with the q/p recurrence seeded by (q_{-1}, p_{-1}) = (0, 1), so
  // level 0 is (lift, x - 1). The height sequence of the level-0 pair
  // then reproduces r_0, r_1, ... exactly.
  static CommutingPair from_circle_map(const map::CircleMap<Real>& f,
                                       std::size_t level) {
    auto ds = map::detail::rotation_digits(f, level);
    if (ds.digits.size() < level)
      throw error("pairs.rational_rotation",
                  "rotation combinatorics end before level " +
                      std::to_string(level));
    // (q_{m-1}, p_{m-1}) and (q_m, p_m) from the digit recurrence,
    // seeded one step earlier than the convergent recurrence.
    cf::int128 q_lo = 0, p_lo = 1;  // level -1
    cf::int128 q_hi = 1, p_hi = 0;  // level 0
    for (std::size_t m = 0; m < level; ++m) {
      cf::int128 r = ds.digits[m];
      cf::int128 q_next = r * q_hi + q_lo;
      cf::int128 p_next = r * p_hi + p_lo;
      q_lo = q_hi;
      p_lo = p_hi;
      q_hi = q_next;
      p_hi = p_next;
    }
    CommutingPair out;
    out.kind_ = Kind::iterate;
    out.map_ = std::make_shared<map::CircleMap<Real>>(f);
    out.eta_iters_ = {p_hi, q_hi};
    out.xi_iters_ = {p_lo, q_lo};
    out.level_ = level;
    // Orientation: pick s = +-1 so that xi(0) > 0 in own coordinates.
    Real xi0_raw = raw_iterate(*out.map_, out.xi_iters_, Real(0));
    out.scale_ = xi0_raw > 0 ? Real(1) : Real(-1);
    out.refresh_endpoints();
    out.check_normalized();
    return out;
  }

  static CommutingPair from_functions(std::function<Real(Real)> eta,
                                      std::function<Real(Real)> xi) {
    CommutingPair out;
    out.kind_ = Kind::functional;
    out.eta_fn_ = std::move(eta);
    out.xi_fn_ = std::move(xi);
    out.scale_ = 1;
    out.refresh_endpoints();
    out.check_normalized();
    return out;
  }

  // Chebyshev snapshot of this pair; both maps are sampled over the
  // full (slightly extended) interval [eta(0), xi(0)] so compositions
  // in either order stay inside the sampled domain.
  CommutingPair sampled(std::size_t nodes) const {
    Real pad = (xi0_ - eta0_) / 16;
    Real a = eta0_ - pad, b = xi0_ + pad;
    CommutingPair out;
    out.kind_ = Kind::sampled;
    out.eta_cheb_ = std::make_shared<cheb::Interpolant<Real>>(
        a, b, nodes, [this](Real y) { return eta(y); });
    out.xi_cheb_ = std::make_shared<cheb::Interpolant<Real>>(
        a, b, nodes, [this](Real y) { return xi(y); });
    out.scale_ = scale_;
    out.level_ = level_;
    out.refresh_endpoints();
    out.check_normalized();
    return out;
  }

  Real eta(Real y) const {
    switch (kind_) {
      case Kind::iterate:
        return scale_ * raw_iterate(*map_, eta_iters_, y / scale_);
      case Kind::sampled:
        return (*eta_cheb_)(y);
      default:
        return eta_fn_(y);
    }
  }

  Real xi(Real y) const {
    switch (kind_) {
      case Kind::iterate:
        return scale_ * raw_iterate(*map_, xi_iters_, y / scale_);
      case Kind::sampled:
        return (*xi_cheb_)(y);
      default:
        return xi_fn_(y);
    }
  }

  Real eta0() const { return eta0_; }
  Real xi0() const { return xi0_; }
  Real scale() const { return scale_; }
  Kind kind() const { return kind_; }
  std::size_t level() const { return level_; }

  // (p, q) iterate data, iterate realization only.
  std::pair<cf::Convergent, cf::Convergent> iterate_indices() const {
    if (kind_ != Kind::iterate)
      throw error("pairs.not_iterate_backed", "no iterate indices");
    return {eta_iters_, xi_iters_};
  }

  nlohmann::json manifest() const {
    nlohmann::json j;
    j["kind"] = kind_ == Kind::iterate   ? "iterate"
                : kind_ == Kind::sampled ? "sampled"
                                         : "functional";
    j["level"] = level_;
    j["scale"] = to_decimal_string(scale_);
    j["eta0"] = to_decimal_string(eta0_);
    j["xi0"] = to_decimal_string(xi0_);
    if (kind_ == Kind::iterate) {
      j["eta_iterates"] = cf::int128_to_string(eta_iters_.q);
      j["eta_shift"] = cf::int128_to_string(eta_iters_.p);
      j["xi_iterates"] = cf::int128_to_string(xi_iters_.q);
      j["xi_shift"] = cf::int128_to_string(xi_iters_.p);
    }
    if (kind_ == Kind::sampled) j["nodes"] = eta_cheb_->size();
    return j;
  }

  template <typename R>
  friend CommutingPair<R> renormalize(const CommutingPair<R>&, std::int64_t);

 private:
  CommutingPair() = default;

  static Real raw_iterate(const map::CircleMap<Real>& f, cf::Convergent pq,
                          Real x) {
    return f.iterate(x, static_cast<std::int64_t>(pq.q),
                     static_cast<std::int64_t>(pq.p));
  }

  void refresh_endpoints() {
    eta0_ = eta(Real(0));
    xi0_ = xi(Real(0));
  }

  void check_normalized() const {
    if (!(eta0_ < 0 && xi0_ > 0))
      throw error("pairs.not_normalized",
                  "need eta(0) < 0 < xi(0); got eta0 = " +
                      to_decimal_string(eta0_) +
                      ", xi0 = " + to_decimal_string(xi0_));
  }

  Kind kind_ = Kind::functional;
  Real eta0_ = 0, xi0_ = 0, scale_ = 1;
  std::size_t level_ = 0;
  // iterate
  std::shared_ptr<map::CircleMap<Real>> map_;
  cf::Convergent eta_iters_{}, xi_iters_{};
  // sampled
  std::shared_ptr<cheb::Interpolant<Real>> eta_cheb_, xi_cheb_;
  // functional
  std::function<Real(Real)> eta_fn_, xi_fn_;
};

struct Height {
  std::int64_t value = 0;
  bool infinite = false;
  bool undecided = false;  // step cap hit before a verdict
};

// chi(pair): the number of eta-steps the right endpoint xi(0) takes
// before crossing zero, i.e. 0 in [eta^{chi+1}(xi0), eta^chi(xi0)].
// If the steps stall (eta has a fixed point above 0) the height is
// infinite; if the cap is hit while still moving, undecided.
template <typename Real>
Height height(const CommutingPair<Real>& p,
              std::int64_t step_cap = 1'000'000) {
  Real stall = 64 * machine_eps<Real>() * (p.xi0() - p.eta0());
  Real x = p.xi0();
  for (std::int64_t k = 0; k < step_cap; ++k) {
    Real y = p.eta(x);
    if (y < 0) return {k, false, false};
    // An exact hit means 0 is an orbit point (a critical cycle one
    // level down): the crossing belongs to the next step.
    if (y == 0) return {k + 1, false, false};
    if (x - y < stall) return {k, true, false};
    x = y;
  }
  return {step_cap, false, true};
}

// One renormalization step: (eta, xi) -> rescaled (eta^r xi, eta) with
// r = chi(pair), rescaled by lambda = 1/eta(0) (negative, so the new
// pair is normalized again and its xi(0) is exactly 1 analytically).
// Pass r >= 0 to skip recomputing the height.
template <typename Real>
CommutingPair<Real> renormalize(const CommutingPair<Real>& p,
                                std::int64_t r = -1) {
  using Pair = CommutingPair<Real>;
  if (r < 0) {
    Height h = height(p);
    if (h.infinite)
      throw error("pairs.height_infinite", "cannot renormalize");
    if (h.undecided)
      throw error("pairs.height_undecided", "height cap hit");
    r = h.value;
  }
  Real lambda = Real(1) / p.eta0();
  Pair out;
  out.level_ = p.level_ + 1;
  out.scale_ = lambda * p.scale_;
  switch (p.kind_) {
    case Pair::Kind::iterate: {
      out.kind_ = Pair::Kind::iterate;
      out.map_ = p.map_;
      cf::int128 rr = r;
      out.eta_iters_ = {rr * p.eta_iters_.p + p.xi_iters_.p,
                        rr * p.eta_iters_.q + p.xi_iters_.q};
      out.xi_iters_ = p.eta_iters_;
      break;
    }
    case Pair::Kind::sampled: {
      out.kind_ = Pair::Kind::sampled;
      auto base = std::make_shared<Pair>(p);
      std::int64_t reps = r;
      // eta^r o xi, evaluated so every intermediate argument stays
      // inside [eta0, xi0]: on the positive side commute one factor
      // (eta^r xi = eta^{r-1} xi eta), since xi there would overshoot
      // the sampled window.
      auto new_eta = [base, lambda, reps](Real z) {
        Real x = z / lambda;
        std::int64_t k = reps;
        if (x > 0 && k > 0) {
          x = base->eta(x);
          --k;
        }
        Real v = base->xi(x);
        for (; k > 0; --k) v = base->eta(v);
        return lambda * v;
      };
      auto new_xi = [base, lambda](Real z) {
        return lambda * base->eta(z / lambda);
      };
      Real e0 = new_eta(Real(0)), x0 = new_xi(Real(0));
      Real pad = (x0 - e0) / 16;
      std::size_t nodes = p.eta_cheb_->size();
      out.eta_cheb_ = std::make_shared<cheb::Interpolant<Real>>(
          e0 - pad, x0 + pad, nodes, std::function<Real(Real)>(new_eta));
      out.xi_cheb_ = std::make_shared<cheb::Interpolant<Real>>(
          e0 - pad, x0 + pad, nodes, std::function<Real(Real)>(new_xi));
      break;
    }
    default: {
      out.kind_ = Pair::Kind::functional;
      auto base = std::make_shared<Pair>(p);
      std::int64_t reps = r;
      out.eta_fn_ = [base, lambda, reps](Real z) {
        Real x = z / lambda;
        std::int64_t k = reps;
        if (x > 0 && k > 0) {
          x = base->eta(x);
          --k;
        }
        Real v = base->xi(x);
        for (; k > 0; --k) v = base->eta(v);
        return lambda * v;
      };
      out.xi_fn_ = [base, lambda](Real z) {
        return lambda * base->eta(z / lambda);
      };
      break;
    }
  }
  out.refresh_endpoints();
  out.check_normalized();
  return out;
}

// Height digit stream chi(pair), chi(R pair), ... (the continued
// fraction of the pair's rotation number).
template <typename Real>
map::DigitStream pair_rotation_digits(CommutingPair<Real> p,
                                      std::size_t count) {
  map::DigitStream out;
  for (std::size_t m = 0; m < count; ++m) {
    Height h = height(p);
    if (h.infinite) {
      out.rational = true;
      out.rational_level = m;
      return out;
    }
    if (h.undecided) {
      out.exhausted = true;
      return out;
    }
    out.digits.push_back(h.value);
    if (m + 1 < count) {
      try {
        p = renormalize(p, h.value);
      } catch (const error& e) {
        // eta(0) collapsing to 0 one level down is a critical cycle:
        // the rotation number is exactly [digits so far].
        if (e.code() != "pairs.not_normalized") throw;
        out.rational = true;
        out.rational_level = m + 1;
        return out;
      }
    }
  }
  return out;
}

namespace detail {

// Rotation digits of fam.at(theta) through `count` digits, computed
// the cheap way: exact orbit digits up to base_level, then heights of
// the sampled renormalization chain. Termination (rational rotation
// number or an undecided height) is encoded as INT64_MAX, which is
// also where it sorts in the digit ordering.
template <typename Real>
std::vector<std::int64_t> chain_digits(const map::CircleMap<Real>& f,
                                       std::size_t count,
                                       std::size_t base_level,
                                       std::size_t nodes) {
  constexpr std::int64_t kEnd = INT64_MAX;
  auto ds = map::detail::rotation_digits(f, base_level);
  std::vector<std::int64_t> out = ds.digits;
  if (out.size() < base_level || count <= base_level) {
    if (out.size() < count) out.push_back(kEnd);
    return out;
  }
  try {
    auto chain = CommutingPair<Real>::from_circle_map(f, base_level)
                     .sampled(nodes);
    while (out.size() < count) {
      Height h = height(chain);
      if (h.infinite || h.undecided) {
        out.push_back(kEnd);
        return out;
      }
      out.push_back(h.value);
      if (out.size() < count) chain = renormalize(chain, h.value);
    }
  } catch (const error&) {
    out.push_back(kEnd);
  }
  return out;
}

// Continued-fraction value order: three-way comparison of digit
// streams, accounting for the alternating monotonicity (a larger
// digit at even index means a smaller value).
inline int digit_stream_compare(const std::vector<std::int64_t>& a,
                                const cf::ContinuedFraction& target,
                                std::size_t count) {
  for (std::size_t m = 0; m < count && m < a.size(); ++m) {
    std::int64_t want =
        m < target.available_terms() ? target.term(m) : INT64_MAX;
    if (a[m] == want) continue;
    bool larger = a[m] > want;
    bool even = m % 2 == 0;
    return larger == even ? -1 : 1;
  }
  return 0;
}

}  // namespace detail

// Parameter whose rotation-number digits match `target` through
// `levels` digits, by bisection on the digit stream of the sampled
// renormalization chain. Unlike map::tune_to_rotation this never
// iterates the lift beyond the base-level return times, so it reaches
// depths whose direct return times would be astronomically large.
// [lo, hi] must bracket the target (seed it with a shallow tune).
template <typename Real>
Real tune_by_renormalization(const map::MapFamily<Real>& fam,
                             const cf::ContinuedFraction& target,
                             std::size_t levels, Real lo, Real hi,
                             std::size_t base_level = 7,
                             std::size_t nodes = 48) {
  for (int it = 0; it < 400; ++it) {
    Real mid = (lo + hi) / 2;
    if (!(mid > lo && mid < hi))
      throw error("pairs.tune_resolution",
                  "bracket narrower than working precision before digits "
                  "matched");
    auto digits = detail::chain_digits(fam.at(mid), levels, base_level, nodes);
    int cmp = detail::digit_stream_compare(digits, target, levels);
    if (cmp == 0) return mid;
    (cmp < 0 ? lo : hi) = mid;
  }
  throw error("pairs.tune_resolution", "bisection iteration cap reached");
}

// ---------------------------------------------------------------------------
// C0 distance between pairs of possibly different scales: both are
// Moebius-rescaled to the unit interval, with (eta0, 0, xi0) pinned to
// (0, 1/2, 1), plus the difference of the interval-length ratios.

namespace detail {

template <typename Real>
struct Moebius {
  Real a, b, c, d;  // t = (a z + b) / (c z + d)
  Real fwd(Real z) const { return (a * z + b) / (c * z + d); }
  Real inv(Real t) const { return (t * d - b) / (a - t * c); }
};

template <typename Real>
Moebius<Real> unit_chart(Real eta0, Real xi0) {
  Real k = xi0 / eta0;
  return {k, -k * eta0, k + 1, -k * eta0 - xi0};
}

}  // namespace detail

template <typename Real>
Real pair_distance(const CommutingPair<Real>& p1,
                   const CommutingPair<Real>& p2,
                   std::size_t grid_size = 257) {
  using std::abs;
  Real r1 = p1.xi0() / p1.eta0(), r2 = p2.xi0() / p2.eta0();
  Real dist = abs(r1 - r2);
  auto w1 = detail::unit_chart(p1.eta0(), p1.xi0());
  auto w2 = detail::unit_chart(p2.eta0(), p2.xi0());
  for (std::size_t i = 0; i < grid_size; ++i) {
    double angle = 3.14159265358979323846 * static_cast<double>(i) /
                   static_cast<double>(grid_size - 1);
    Real t = (1 + Real(std::cos(angle))) / 2;
    // t >= 1/2 is the image of I_eta, below it the image of I_xi.
    bool eta_branch = 2 * t >= 1;
    Real z1 = w1.inv(t), z2 = w2.inv(t);
    Real u1 = w1.fwd(eta_branch ? p1.eta(z1) : p1.xi(z1));
    Real u2 = w2.fwd(eta_branch ? p2.eta(z2) : p2.xi(z2));
    Real d = abs(u1 - u2);
    if (d > dist) dist = d;
  }
  return dist;
}

// Commuting-pair axioms on a grid: normalization, commutation on the
// overlap, xi(eta0) inside I_eta, and a cubic (flat to first order)
// critical point of eta at 0.
template <typename Real>
void validate(const CommutingPair<Real>& p, Real eps_commute,
              std::size_t grid_size = 65) {
  using std::abs;
  Real span = p.xi0() - p.eta0();
  Real hi = p.xi(p.eta0());
  if (!(hi > 0 && hi < p.xi0()))
    throw error("pairs.range", "xi(eta(0)) outside (0, xi(0))");
  Real worst = 0;
  for (std::size_t i = 0; i < grid_size; ++i) {
    Real x = p.eta0() * Real(static_cast<double>(i)) /
             Real(static_cast<double>(grid_size - 1));
    Real d = abs(p.eta(p.xi(x)) - p.xi(p.eta(x)));
    if (d > worst) worst = d;
  }
  if (worst > eps_commute * span)
    throw error("pairs.commutation",
                "commutator " + to_decimal_string(worst) + " exceeds " +
                    to_decimal_string(eps_commute * span));
  // Cubic critical point: the chord slope near 0 must collapse
  // quadratically relative to the full-interval slope.
  Real h = p.xi0() / 128;
  Real local = (p.eta(h) - p.eta0()) / h;
  Real global = (p.eta(p.xi0()) - p.eta0()) / p.xi0();
  if (!(abs(local) < abs(global) / 100))
    throw error("pairs.not_critical",
                "eta is not flat at 0: chord ratio " +
                    to_decimal_string(local / global));
}

// ---------------------------------------------------------------------------
// Gluing: the circle [eta(0), xi(eta(0))] / (ends identified), with
//   F = eta o xi on [eta(0), 0),  F = eta on [0, xi(eta(0))).
template <typename Real>
class GluedCircleMap {
 public:
  explicit GluedCircleMap(CommutingPair<Real> p)
      : pair_(std::move(p)),
        lo_(pair_.eta0()),
        hi_(pair_.xi(pair_.eta0())),
        len_(hi_ - lo_) {
    if (!(hi_ > 0)) throw error("pairs.range", "degenerate glued circle");
  }

  Real lo() const { return lo_; }
  Real hi() const { return hi_; }
  Real length() const { return len_; }
  const CommutingPair<Real>& pair() const { return pair_; }

  // One application, wrapped back into [lo, hi).
  Real step(Real x) const {
    Real y = x < 0 ? pair_.eta(pair_.xi(x)) : pair_.eta(x);
    if (y >= hi_) y -= len_;
    if (y < lo_) y += len_;
    return y;
  }

 private:
  CommutingPair<Real> pair_;
  Real lo_, hi_, len_;
};

struct GluedRotation {
  std::vector<std::int64_t> digits;  // certified continued-fraction prefix
  cf::Convergent lower;              // rational bracket around rho
  cf::Convergent upper;
  double rho = 0;
};

// Rotation number of the glued map by orbit combinatorics: each orbit
// point gives the exact bound p/k < rho < (p+1)/k (Poincare
// comparison with the rigid rotation; no metric estimates involved),
// and the certified digits are the shared Euclidean prefix of the best
// bracket. Orientation note: the glued dynamics advances points toward
// eta(0), i.e. in the decreasing direction, so displacement is
// measured as x - F(x); this is the orientation in which the glued
// rotation number reproduces the pair's height sequence.
template <typename Real>
GluedRotation glued_rotation(const GluedCircleMap<Real>& g,
                             std::int64_t steps) {
  Real L = g.length();
  Real c0 = -g.lo();  // basepoint 0 in the [0, L) chart
  Real c = c0;
  std::int64_t wind = 0;
  // best lower bound a/k and upper bound b/k, compared exactly
  cf::int128 lo_p = 0, lo_q = 1, hi_p = 1, hi_q = 1;
  for (std::int64_t k = 1; k <= steps; ++k) {
    Real x = c + g.lo();
    Real next = g.step(x) - g.lo();
    // reversed orientation: wrapping happens when the value increases
    if (next > c) ++wind;
    c = next;
    cf::int128 a, b;
    if (c < c0) {
      a = wind;
      b = wind + 1;
    } else if (c > c0) {
      a = wind - 1;
      b = wind;
    } else {
      a = b = wind;  // exact return: rho = wind / k
    }
    if (a * lo_q > lo_p * k) {
      lo_p = a;
      lo_q = k;
    }
    if (b * hi_q < hi_p * k) {
      hi_p = b;
      hi_q = k;
    }
  }
  if (lo_p < 0) lo_p = 0;
  GluedRotation out;
  out.lower = {lo_p, lo_q};
  out.upper = {hi_p, hi_q};
  out.rho = 0.5 * (static_cast<double>(lo_p) / static_cast<double>(lo_q) +
                   static_cast<double>(hi_p) / static_cast<double>(hi_q));
  if (hi_p < hi_q)
    out.digits = cf::common_prefix_digits(lo_p, lo_q, hi_p, hi_q);
  return out;
}

}  // namespace renormlab::pairs
