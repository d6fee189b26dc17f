#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "cusp/errors.hpp"
#include "cusp/real.hpp"

namespace cusp {

/// Point of the upper half plane.
struct HPoint {
  Real x = 0;
  Real y = 1;
};

/// Point of the closed unit disk in Cartesian form.
struct DiskXY {
  Real u = 0;
  Real v = 0;
};

/// Point of the unit circle, stored by its angle in [-pi, pi).
struct DiskPoint {
  RealScalar angle;

  DiskPoint() = default;
  explicit DiskPoint(RealScalar a) : angle(RealScalar(wrap_angle(a.value), a.err)) {}
  explicit DiskPoint(Real a, Real e = 0) : DiskPoint(RealScalar(a, e)) {}
};

/// Projective 2x2 real matrix with det 1 and first nonzero entry positive.
/// `err` bounds the absolute error of every entry.
struct MoebiusMap {
  Real a = 1, b = 0, c = 0, d = 1;
  Real err = 0;

  static MoebiusMap identity() { return {}; }
  static MoebiusMap translation(const Real& t) { return make(1, t, 0, 1); }

  /// Normalizes to det 1 and the sign convention. Requires det > 0.
  static MoebiusMap make(Real a, Real b, Real c, Real d, Real err = 0) {
    Real det = a * d - b * c;
    if (!(det > 0))
      throw Error(ErrorCode::InvalidDomain, "matrix determinant must be positive");
    MoebiusMap m;
    if (det != 1) {
      Real s = sqrt(det);
      a /= s; b /= s; c /= s; d /= s;
      err = err / s + 4 * eps() * (abs(a) + abs(b) + abs(c) + abs(d));
    }
    bool flip = a != 0 ? a < 0 : (b != 0 ? b < 0 : (c != 0 ? c < 0 : d < 0));
    if (flip) { a = -a; b = -b; c = -c; d = -d; }
    m.a = a; m.b = b; m.c = c; m.d = d; m.err = err;
    return m;
  }

  Real trace() const { return a + d; }
  Real det() const { return a * d - b * c; }
  Real max_entry() const {
    return std::max(std::max(abs(a), abs(b)), std::max(abs(c), abs(d)));
  }

  /// Image of a finite real number; the caller guarantees cx+d != 0.
  Real apply_real(const Real& x) const { return (a * x + b) / (c * x + d); }

  /// Image of a point of the upper half plane. Im g(z) = Im z / |cz+d|^2.
  HPoint apply_h(const HPoint& z) const {
    Real dx = c * z.x + d, dy = c * z.y;
    Real den = dx * dx + dy * dy;
    Real nx = a * z.x + b, ny = a * z.y;
    return {(nx * dx + ny * dy) / den, z.y / den};
  }
};

/// Projective equality up to a global sign, within tol on every entry.
inline bool proj_equal(const MoebiusMap& m, const MoebiusMap& n, Real tol = 0) {
  auto close = [&](int s) {
    return abs(m.a - s * n.a) <= tol && abs(m.b - s * n.b) <= tol &&
           abs(m.c - s * n.c) <= tol && abs(m.d - s * n.d) <= tol;
  };
  return close(1) || close(-1);
}

inline bool operator==(const MoebiusMap& m, const MoebiusMap& n) {
  return proj_equal(m, n, 0);
}

inline MoebiusMap compose(const MoebiusMap& m1, const MoebiusMap& m2) {
  Real a = m1.a * m2.a + m1.b * m2.c;
  Real b = m1.a * m2.b + m1.b * m2.d;
  Real c = m1.c * m2.a + m1.d * m2.c;
  Real d = m1.c * m2.b + m1.d * m2.d;
  Real s1 = m1.max_entry(), s2 = m2.max_entry();
  Real e = 2 * (s1 * m2.err + s2 * m1.err + m1.err * m2.err);
  // Integer products below 2^112 are exact; anything else pays one rounding.
  auto integral = [](const MoebiusMap& m) {
    return m.a == floor(m.a) && m.b == floor(m.b) && m.c == floor(m.c) &&
           m.d == floor(m.d);
  };
  if (!(integral(m1) && integral(m2) && 2 * s1 * s2 < ldexp(Real(1), 112)))
    e += 8 * eps() * s1 * s2;
  // The product of det-1 factors has det 1; recomputing it would cancel
  // catastrophically once entries pass 2^56, so only the sign is fixed.
  MoebiusMap m;
  bool flip = a != 0 ? a < 0 : (b != 0 ? b < 0 : (c != 0 ? c < 0 : d < 0));
  int s = flip ? -1 : 1;
  m.a = s * a; m.b = s * b; m.c = s * c; m.d = s * d; m.err = e;
  return m;
}

inline MoebiusMap operator*(const MoebiusMap& m1, const MoebiusMap& m2) {
  return compose(m1, m2);
}

inline MoebiusMap inverse(const MoebiusMap& m) {
  return MoebiusMap::make(m.d, -m.b, -m.c, m.a, m.err);
}

/// Homographic image on the extended real line.
inline ExtendedReal apply(const MoebiusMap& m, const ExtendedReal& z) {
  if (z.is_inf()) {
    if (m.c == 0) return ExtendedReal::infinity();
    Real w = m.a / m.c;
    Real e = (m.err * (abs(m.a) + abs(m.c))) / (m.c * m.c) + RealScalar::ulp(w);
    return ExtendedReal(w, e);
  }
  const Real& x = z.value();
  Real den = m.c * x + m.d;
  if (den == 0) return ExtendedReal::infinity();
  Real w = (m.a * x + m.b) / den;
  // d/dx of the map is 1/den^2; entry errors perturb numerator and denominator.
  Real e = z.err() / (den * den) +
           m.err * (abs(x) + 1) * (abs(w) + 1) / abs(den) + 4 * RealScalar::ulp(w);
  return ExtendedReal(w, e);
}

enum class MapClass { identity, elliptic, parabolic, hyperbolic };

inline const char* class_name(MapClass k) {
  switch (k) {
    case MapClass::identity: return "identity";
    case MapClass::elliptic: return "elliptic";
    case MapClass::parabolic: return "parabolic";
    case MapClass::hyperbolic: return "hyperbolic";
  }
  return "?";
}

/// Classification by |trace|. Differences from 2 at rounding level count as
/// exact; a wider error band straddling 2 is reported as ambiguous.
inline MapClass classify(const MoebiusMap& m, Real tol = Real(1e-20)) {
  Real t = abs(m.trace());
  Real band = 2 * m.err + 8 * eps() * (abs(m.a) + abs(m.d));
  Real diff = t - 2;
  if (abs(diff) <= tol && band <= tol) {
    Real off = std::max(abs(m.b), abs(m.c)) + abs(m.a - m.d);
    return off <= tol ? MapClass::identity : MapClass::parabolic;
  }
  if (abs(diff) <= band)
    throw Error(ErrorCode::AmbiguousClassification,
                "|trace| - 2 = " + to_decimal(diff, 6) + " inside err band " +
                    to_decimal(band, 6));
  return diff < 0 ? MapClass::elliptic : MapClass::hyperbolic;
}

/// Fixed points on the extended real line (one for parabolic maps).
inline std::vector<ExtendedReal> fixed_points(const MoebiusMap& m) {
  std::vector<ExtendedReal> out;
  Real disc = m.trace() * m.trace() - 4;
  if (m.c == 0) {
    out.push_back(ExtendedReal::infinity());
    if (m.a != m.d) out.emplace_back(m.b / (m.d - m.a));
    return out;
  }
  if (disc < 0) return out;
  Real r = sqrt(disc);
  Real x1 = (m.a - m.d + r) / (2 * m.c), x2 = (m.a - m.d - r) / (2 * m.c);
  out.emplace_back(x1);
  if (r != 0) out.emplace_back(x2);
  return out;
}

/// Attracting fixed point of a hyperbolic map, |cx+d| < 1 there.
inline ExtendedReal attracting_fixed_point(const MoebiusMap& m) {
  auto fp = fixed_points(m);
  if (fp.size() == 1) return fp[0];
  for (auto& x : fp) {
    if (x.is_inf()) {
      if (abs(m.d) < abs(m.a) || m.c != 0) continue;
      return x;
    }
    Real den = m.c * x.value() + m.d;
    if (abs(den) > 1) return x;  // derivative 1/den^2 < 1
  }
  return fp[0];
}

// ---------------------------------------------------------------- Cayley

/// Boundary version: angle of (x - i)/(x + i); infinity goes to angle 0.
inline DiskPoint cayley(const ExtendedReal& x) {
  if (x.is_inf()) return DiskPoint(Real(0));
  Real t = -2 * atan2(Real(1), x.value());
  // d theta / dx = 2/(1+x^2)
  Real e = 2 * x.err() / (1 + x.value() * x.value()) + 4 * eps();
  return DiskPoint(t, e);
}

/// Inverse boundary map x = -cot(theta/2); angle 0 goes to infinity.
inline ExtendedReal inv_cayley(const DiskPoint& p) {
  Real h = p.angle.value / 2;
  Real s = sin(h);
  if (s == 0) return ExtendedReal::infinity();
  Real x = -cos(h) / s;
  Real e = p.angle.err * (1 + x * x) / 2 + 4 * RealScalar::ulp(x) + 4 * eps();
  return ExtendedReal(x, e);
}

inline DiskXY cayley(const HPoint& z) {
  // (z - i)/(z + i) with z = x + iy.
  Real den = z.x * z.x + (z.y + 1) * (z.y + 1);
  return {(z.x * z.x + z.y * z.y - 1) / den, -2 * z.x / den};
}

inline HPoint inv_cayley(const DiskXY& w) {
  // z = i (1 + w)/(1 - w)
  Real du = 1 - w.u, dv = -w.v;
  Real den = du * du + dv * dv;
  Real nu = 1 + w.u, nv = w.v;
  Real re = (nu * du + nv * dv) / den, im = (nv * du - nu * dv) / den;
  return {-im, re};
}

inline DiskXY disk_xy(const DiskPoint& p) {
  return {cos(p.angle.value), sin(p.angle.value)};
}

// ---------------------------------------------------------------- geodesics

struct GeodesicH {
  ExtendedReal backward;
  ExtendedReal forward;
};

/// Half the Euclidean gap between finite endpoints, infinite otherwise.
inline ExtendedReal naive_height(const GeodesicH& g) {
  if (g.backward.is_inf() || g.forward.is_inf()) return ExtendedReal::infinity();
  Real h = abs(g.forward.value() - g.backward.value()) / 2;
  return ExtendedReal(h, (g.forward.err() + g.backward.err()) / 2 + RealScalar::ulp(h));
}

struct Conjugation {
  std::vector<MoebiusMap> generators;
  RealScalar lagrange_scale;  // L scales by 1/lambda^2
};

/// Replaces each g by B g B^-1 with B = [[lambda, nu], [0, 1/lambda]].
inline Conjugation conjugate_normalize(const std::vector<MoebiusMap>& gens,
                                       const RealScalar& lambda,
                                       const RealScalar& nu) {
  if (lambda.value == 0)
    throw Error(ErrorCode::PreconditionFailed, "lambda must be nonzero");
  const Real& l = lambda.value;
  MoebiusMap B;
  B.a = l; B.b = nu.value; B.c = 0; B.d = 1 / l;
  B.err = lambda.err + nu.err + RealScalar::ulp(B.d);
  MoebiusMap Binv = inverse(B);
  Conjugation out;
  for (const auto& g : gens) out.generators.push_back(compose(compose(B, g), Binv));
  Real s = 1 / (l * l);
  out.lagrange_scale = RealScalar(s, 2 * lambda.err * abs(s / l) + RealScalar::ulp(s));
  return out;
}

}  // namespace cusp
