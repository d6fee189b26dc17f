#pragma once

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/float128.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace cusp {

// 113-bit binary mantissa. Integer matrix entries below 2^113 stay exact.
using Real = boost::multiprecision::float128;

inline constexpr int kMantissaBits = std::numeric_limits<Real>::digits;

inline Real pi() { return boost::math::constants::pi<Real>(); }
inline Real two_pi() { return 2 * pi(); }
inline Real eps() { return std::numeric_limits<Real>::epsilon(); }

inline Real parse_real(const std::string& s) { return Real(s); }

/// Shortest round-trip decimal rendering.
inline std::string to_decimal(const Real& x, int digits = 36) {
  if (x == 0) return "0";
  return x.str(digits, std::ios_base::scientific);
}

inline double to_double(const Real& x) { return x.convert_to<double>(); }

/// Wrap an angle into [-pi, pi).
inline Real wrap_angle(Real t) {
  const Real tp = two_pi();
  if (t >= -pi() && t < pi()) return t;
  t = fmod(t + pi(), tp);
  if (t < 0) t += tp;
  Real r = t - pi();
  if (r >= pi()) r -= tp;
  return r;
}

/// Clockwise distance from angle a to angle b, in [0, 2pi).
inline Real cw_distance(const Real& a, const Real& b) {
  Real d = fmod(a - b, two_pi());
  if (d < 0) d += two_pi();
  return d;
}

/// Unsigned angular distance on the circle.
inline Real angle_gap(const Real& a, const Real& b) {
  Real d = cw_distance(a, b);
  return d < two_pi() - d ? d : two_pi() - d;
}

/// A real value with an absolute error bound. Operations widen err by the
/// propagated first-order bound plus one rounding unit.
struct RealScalar {
  Real value = 0;
  Real err = 0;

  RealScalar() = default;
  RealScalar(Real v, Real e = 0) : value(v), err(abs(e)) {}
  RealScalar(int v) : value(v), err(0) {}
  RealScalar(double v) : value(v), err(0) {}

  static Real ulp(const Real& v) { return abs(v) * eps(); }

  Real lo() const { return value - err; }
  Real hi() const { return value + err; }
  bool contains(const Real& x) const { return abs(x - value) <= err; }
};

inline RealScalar operator+(const RealScalar& a, const RealScalar& b) {
  Real v = a.value + b.value;
  return {v, a.err + b.err + RealScalar::ulp(v)};
}
inline RealScalar operator-(const RealScalar& a, const RealScalar& b) {
  Real v = a.value - b.value;
  return {v, a.err + b.err + RealScalar::ulp(v)};
}
inline RealScalar operator-(const RealScalar& a) { return {-a.value, a.err}; }
inline RealScalar operator*(const RealScalar& a, const RealScalar& b) {
  Real v = a.value * b.value;
  return {v, abs(a.value) * b.err + abs(b.value) * a.err + a.err * b.err +
                 RealScalar::ulp(v)};
}
inline RealScalar operator/(const RealScalar& a, const RealScalar& b) {
  Real v = a.value / b.value;
  Real den = abs(b.value) - b.err;
  Real e = den > 0 ? (abs(a.value) * b.err + abs(b.value) * a.err) /
                         (abs(b.value) * den)
                   : std::numeric_limits<Real>::infinity();
  return {v, e + RealScalar::ulp(v)};
}
inline RealScalar abs(const RealScalar& a) { return {abs(a.value), a.err}; }

/// A point of R u {inf}. The point at infinity carries no sign.
struct ExtendedReal {
  bool inf = false;
  RealScalar v;

  ExtendedReal() = default;
  ExtendedReal(RealScalar x) : inf(false), v(x) {}
  ExtendedReal(Real x, Real e = 0) : inf(false), v(x, e) {}
  ExtendedReal(int x) : inf(false), v(Real(x)) {}
  ExtendedReal(double x) : inf(false), v(Real(x)) {}
  static ExtendedReal infinity() {
    ExtendedReal r;
    r.inf = true;
    return r;
  }

  bool is_inf() const { return inf; }
  const Real& value() const { return v.value; }
  const Real& err() const { return v.err; }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.inf || b.inf) return a.inf && b.inf;
    return a.v.value == b.v.value;
  }
};

}  // namespace cusp
