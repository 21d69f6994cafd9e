#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>

namespace renormlab {

// Extended-precision scalar: 40 decimal digits (~133-bit mantissa),
// backed by MPFR (noticeably faster trig than the portable binary
// backend, which matters at 10^7-iterate orbits). Everything numeric
// in the library is templated on Real.
using ext = boost::multiprecision::number<
    boost::multiprecision::mpfr_float_backend<40>,
    boost::multiprecision::et_off>;

template <typename Real>
Real pi_v();

template <>
inline double pi_v<double>() {
  return 3.14159265358979323846264338327950288;
}

template <>
inline ext pi_v<ext>() {
  // 40-digit value, parsed once.
  static const ext value(
      "3.141592653589793238462643383279502884197169399375105820975");
  return value;
}

template <typename Real>
inline double as_double(const Real& x) {
  return static_cast<double>(x);
}

template <typename Real>
constexpr int decimal_digits() {
  return std::numeric_limits<Real>::max_digits10;
}

// Full-precision decimal string, for CSV/JSON emission.
template <typename Real>
inline std::string to_decimal_string(const Real& x) {
  std::ostringstream os;
  os.precision(decimal_digits<Real>());
  os << x;
  return os.str();
}

template <typename Real>
inline Real parse_decimal(const std::string& s) {
  if constexpr (std::is_same_v<Real, double>) {
    return std::stod(s);
  } else {
    return Real(s);
  }
}

template <typename Real>
inline Real machine_eps() {
  return std::numeric_limits<Real>::epsilon();
}

enum class Precision { f64, extended };

inline std::string precision_name(Precision p) {
  return p == Precision::f64 ? "f64" : "ext";
}

}  // namespace renormlab
