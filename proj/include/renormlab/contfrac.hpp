#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "renormlab/error.hpp"
#include "renormlab/precision.hpp"

namespace renormlab::cf {

// Convergent numerators/denominators are kept in 128-bit integers;
// overflow is an error, never wraparound (golden q_m leaves 64 bits
// near m ~ 92, desk scale stays far below that).
using int128 = __int128;

std::string int128_to_string(int128 v);

// A rotation number as a continued fraction [r_0, r_1, ...] with
// positive integer terms. `head` holds an explicit prefix; if `period`
// is nonempty the terms repeat it forever past the head (golden mean:
// head = {}, period = {1}). Without a period the fraction is finite.
class ContinuedFraction {
 public:
  ContinuedFraction() = default;
  ContinuedFraction(std::vector<std::int64_t> head,
                    std::vector<std::int64_t> period = {});

  static ContinuedFraction golden() { return ContinuedFraction({}, {1}); }
  static ContinuedFraction silver() { return ContinuedFraction({}, {2}); }

  bool infinite() const { return !period_.empty(); }
  std::size_t head_size() const { return head_.size(); }
  const std::vector<std::int64_t>& head() const { return head_; }
  const std::vector<std::int64_t>& period() const { return period_; }

  // Number of terms available; SIZE_MAX for periodic fractions.
  std::size_t available_terms() const;

  // i-th term (0-based). Throws error("contfrac.insufficient_terms").
  std::int64_t term(std::size_t i) const;

  std::string to_json() const;
  static ContinuedFraction from_json(const std::string& text);

 private:
  std::vector<std::int64_t> head_;
  std::vector<std::int64_t> period_;
};

struct Convergent {
  int128 p = 0;
  int128 q = 1;
};

// (p_m, q_m) with q_0 = 1, q_1 = r_0 and q_{m+1} = r_m q_m + q_{m-1};
// p follows the same recurrence from p_0 = 0, p_1 = 1.
Convergent convergents(const ContinuedFraction& cf, std::size_t m);

// 128-bit -> Real via 64-bit halves (some backends lack an __int128
// conversion, and going through double would lose the low bits).
template <typename Real>
Real to_real(int128 v) {
  bool neg = v < 0;
  unsigned __int128 u =
      neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  Real r = Real(static_cast<std::uint64_t>(u >> 64));
  r = r * Real(18446744073709551616.0) + Real(static_cast<std::uint64_t>(u));
  return neg ? -r : r;
}

// p_depth / q_depth in working precision.
template <typename Real>
Real value(const ContinuedFraction& cf, std::size_t depth) {
  Convergent c = convergents(cf, depth);
  return to_real<Real>(c.p) / to_real<Real>(c.q);
}

struct GaussExpansion {
  ContinuedFraction cf;
  bool precision_exhausted = false;  // fewer digits than requested
};

// First n terms of x in (0,1) by iterating the Gauss map with directed
// rounding on 1/x; stops early (with the flag set) once the remainder
// is within tol of a term boundary.
template <typename Real>
GaussExpansion gauss_expand(Real x, std::size_t n,
                            Real tol = Real(1) / Real(1ull << 45)) {
  if (!(x > Real(0) && x < Real(1)))
    throw error("contfrac.domain", "gauss_expand needs x in (0,1)");
  using std::floor;
  std::vector<std::int64_t> terms;
  bool exhausted = false;
  Real y = x;
  for (std::size_t i = 0; i < n; ++i) {
    Real inv = Real(1) / y;
    Real fl = floor(inv);
    Real frac = inv - fl;
    // Directed rounding: a remainder hugging either end of [0,1)
    // means the next digit is no longer trustworthy.
    if (frac > Real(1) - tol) {
      fl += Real(1);
      frac = Real(0);
    }
    auto digit = static_cast<std::int64_t>(fl);
    if (digit < 1) throw error("contfrac.domain", "nonpositive digit");
    terms.push_back(digit);
    if (frac < tol) {
      exhausted = i + 1 < n;
      return {ContinuedFraction(std::move(terms)), exhausted || frac == Real(0)};
    }
    y = frac;
    tol *= fl + Real(1);  // error in y grows roughly by 1/y per step
    if (tol > Real(0.5)) {
      exhausted = true;
      break;
    }
  }
  return {ContinuedFraction(std::move(terms)), exhausted};
}

bool is_bounded_type(const ContinuedFraction& cf, std::int64_t B,
                     std::size_t depth);

// Canonical (Euclidean) continued-fraction digits of p/q in [0, 1).
std::vector<std::int64_t> euclid_digits(int128 p, int128 q);

// Digits shared by every x strictly between two rationals. Both
// endpoints lie in the cylinder of their common canonical prefix, and
// cylinders are intervals, so the prefix is valid for the whole gap.
std::vector<std::int64_t> common_prefix_digits(int128 p1, int128 q1,
                                               int128 p2, int128 q2);

}  // namespace renormlab::cf
