#pragma once

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cusp/hall_ray.hpp"

namespace cusp {

// ---------------------------------------------------------------- reduction

/// Side of the fundamental domain as a geodesic of H: either Re z = v or
/// the semicircle |z - c| = R.
struct SideGeodesic {
  bool vertical = false;
  Real v = 0, c = 0, R = 0;
  int interior_sign = 1;  // sign of the side test at i, which lies in F

  static SideGeodesic from_arc(const Arc& a) {
    SideGeodesic s;
    if (a.xl.is_inf() || a.xr.is_inf()) {
      s.vertical = true;
      s.v = a.xl.is_inf() ? a.xr.value() : a.xl.value();
    } else {
      s.c = (a.xl.value() + a.xr.value()) / 2;
      s.R = abs(a.xr.value() - a.xl.value()) / 2;
    }
    s.interior_sign = s.test(HPoint{0, 1}) >= 0 ? 1 : -1;
    return s;
  }
  /// Positive outside the semicircle, or right of the vertical line.
  Real test(const HPoint& z) const {
    if (vertical) return z.x - v;
    Real dx = z.x - z.x * 0 - c;
    return dx * dx + z.y * z.y - R * R;
  }
  bool inside_F(const HPoint& z, Real tol = 0) const { return interior_sign * test(z) >= -tol; }
};

inline std::vector<SideGeodesic> domain_sides(const IdealPolygonDomain& D) {
  std::vector<SideGeodesic> out;
  for (int i = 0; i < D.size(); ++i) out.push_back(SideGeodesic::from_arc(D.arcs[i]));
  return out;
}

inline bool in_closed_domain(const std::vector<SideGeodesic>& sides, const HPoint& z,
                             Real tol = Real(1e-24)) {
  for (auto& s : sides)
    if (!s.inside_F(z, tol * (1 + z.x * z.x + z.y * z.y))) return false;
  return true;
}

/// Moves z into the closure of F: translate by the eta generator, then
/// apply g_a^-1 while z is inside the isometric circle s_a. Each step
/// raises Im z, so on a Ford domain the result maximizes Im over the orbit.
inline HPoint reduce_to_domain(const IdealPolygonDomain& D, HPoint z, long max_steps = 100000) {
  if (!(z.y > 0)) throw Error(ErrorCode::PoleProximity, "point not in the upper half plane");
  const MoebiusMap& p = D.g(D.eta);
  if (p.c != 0) throw Error(ErrorCode::PreconditionFailed, "eta is not a translation");
  const Real mu = abs(p.b / p.d), half = mu / 2;
  const auto sides = domain_sides(D);
  for (long n = 0; n < max_steps; ++n) {
    z.x -= mu * floor((z.x + half) / mu);
    bool moved = false;
    for (int i = 0; i < D.size() && !moved; ++i) {
      const auto& s = sides[i];
      if (s.vertical || s.inside_F(z)) continue;
      HPoint w = D.g(Letter::from_id(i).inv()).apply_h(z);
      if (!(w.y > z.y))
        throw Error(ErrorCode::PreconditionFailed, "domain is not a Ford domain at side " +
                                                       D.names[i]);
      z = w;
      moved = true;
    }
    if (!moved) return z;
  }
  throw Error(ErrorCode::PoleProximity, "reduction did not terminate");
}

// ---------------------------------------------------------------- height functions

/// Perturbation family h = Im + delta sin(2 pi Re z / mu) rho(Im z) applied
/// after reduction, with rho the smoothstep from 0 at lo to 1 at hi.
struct BumpParams {
  Real delta = Real(0.01);
  Real l0 = 1;
  Real lo = 1, hi = 2;
};

inline Real smoothstep(const Real& t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  return t * t * (3 - 2 * t);
}

/// G-invariant h with certificates for h - Im: sup_cert >= sup |h - Im| on
/// U_{l0} and on the closure of F, lip_cert >= Lip(h - Im) on U_{l0}.
struct HeightFunction {
  std::function<Real(const HPoint&)> eval;
  const IdealPolygonDomain* domain = nullptr;
  Real l0 = 1;
  Real sup_cert = 0;
  Real lip_cert = 0;
  bool exact = false;  // h = Im on U_{l0}
  std::string name = "h";

  Real certified_lip_norm() const { return sup_cert + lip_cert; }
  Real operator()(const HPoint& z) const { return eval(z); }

  /// Height in the cusp at infinity: Im of the reduced point.
  static HeightFunction im(const IdealPolygonDomain& D, Real l0 = 1) {
    HeightFunction h;
    const IdealPolygonDomain* dp = &D;
    h.eval = [dp](const HPoint& z) {
      if (z.y > dp->margulis.value) return z.y;  // U_m is precisely invariant
      return reduce_to_domain(*dp, z).y;
    };
    h.domain = &D;
    h.l0 = l0;
    h.exact = true;
    h.name = "Im";
    return h;
  }

  static HeightFunction bump(const IdealPolygonDomain& D, const BumpParams& b) {
    if (!(b.hi > b.lo)) throw Error(ErrorCode::PreconditionFailed, "cutoff needs hi > lo");
    if (!(b.delta >= 0)) throw Error(ErrorCode::PreconditionFailed, "delta must be nonnegative");
    HeightFunction h;
    const IdealPolygonDomain* dp = &D;
    const Real mu = D.mu.value, k = two_pi() / mu, w = b.hi - b.lo;
    const Real lo = b.lo, delta = b.delta;
    h.eval = [dp, k, w, lo, delta](const HPoint& z) {
      HPoint r = z.y > dp->margulis.value ? z : reduce_to_domain(*dp, z);
      Real rho = smoothstep((r.y - lo) / w);
      if (rho == 0 || delta == 0) return r.y;
      return r.y + delta * sin(k * r.x) * rho;
    };
    h.domain = &D;
    h.l0 = b.l0;
    h.sup_cert = b.delta;
    // |grad sin(kx) rho(y)| <= sqrt(k^2 + max rho'^2), max rho' = 3/(2w).
    h.lip_cert = b.delta * sqrt(k * k + Real(9) / (4 * w * w));
    h.exact = b.delta == 0;
    h.name = "bump(delta=" + to_decimal(b.delta, 6) + ")";
    return h;
  }
};

/// delta_G = min{1/(4 m sqrt 2), 1/(4 sqrt 2)}.
inline Real delta_G(const IdealPolygonDomain& D) {
  Real base = 1 / (4 * sqrt(Real(2)));
  return std::min(base / D.margulis.value, base);
}

/// Largest |h(g z) - h(z)| over seeded samples z and generators g.
inline Real invariance_defect(const HeightFunction& h, int samples = 200,
                              std::uint64_t seed = 1) {
  const IdealPolygonDomain& D = *h.domain;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-3, 3), uy(0.05, 6);
  Real worst = 0;
  for (int n = 0; n < samples; ++n) {
    HPoint z{Real(ux(rng)), Real(uy(rng))};
    Real hz = h(z);
    for (Letter a : D.letters()) {
      Real v = h(D.g(a).apply_h(z));
      worst = std::max(worst, abs(v - hz) / (1 + abs(hz)));
    }
  }
  return worst;
}

/// h_l = h on Im z > l and 0 below.
struct TruncatedHeight {
  HeightFunction base;
  Real l = 1;

  Real operator()(const HPoint& z) const { return z.y > l ? base(z) : Real(0); }
};

// ---------------------------------------------------------------- H from endpoints

struct HValue {
  RealScalar value;   // err is the optimizer tolerance
  Real theta = 0;     // maximizer on z = c + r e^{i theta}
  Real gap_bound = 0; // how far an unrefined scan cell could exceed the value
  bool certified = false;
  long evals = 0;
};

namespace detail {

/// Golden-section maximum of f on [a, b] down to a bracket of width tol.
template <class F>
std::pair<Real, Real> golden_max(const F& f, Real a, Real b, const Real& tol, long& evals) {
  static const Real g = (sqrt(Real(5)) - 1) / 2;
  Real c = b - g * (b - a), d = a + g * (b - a);
  Real fc = f(c), fd = f(d);
  evals += 2;
  while (b - a > tol) {
    if (fc >= fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  return fc >= fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

/// Golden refinement of a scanned f(theta). With cell bounds `upper(i)` the
/// cells around sampled local maxima are refined and gap_bound reports how
/// far any unrefined cell could exceed the result; without bounds the two
/// cells next to the best sample are refined.
template <class F>
HValue refine_scan(const F& f, const std::vector<Real>& th, const std::vector<Real>& v,
                   const Real& theta_tol, const std::function<Real(int)>* upper) {
  HValue out;
  const int cells = (int)th.size() - 1;
  out.evals = cells + 1;
  int arg = 0;
  for (int i = 1; i <= cells; ++i)
    if (v[i] > v[arg]) arg = i;
  Real best = v[arg], best_t = th[arg];
  std::vector<char> refine(cells, 0);
  std::vector<Real> ub;
  if (upper) {
    ub.resize(cells);
    // Cells beside each local maximum of the samples are refined when their
    // bound can beat the best sample; the rest only enter gap_bound.
    for (int i = 0; i < cells; ++i) ub[i] = (*upper)(i);
    for (int i = 0; i <= cells; ++i) {
      bool peak = (i == 0 || v[i] >= v[i - 1]) && (i == cells || v[i] >= v[i + 1]);
      if (!peak) continue;
      if (i > 0 && ub[i - 1] > best) refine[i - 1] = 1;
      if (i < cells && ub[i] > best) refine[i] = 1;
    }
  } else {
    if (arg > 0) refine[arg - 1] = 1;
    if (arg < cells) refine[arg] = 1;
  }
  for (int i = 0; i < cells; ++i) {
    if (!refine[i] || !(th[i + 1] - th[i] > theta_tol)) continue;
    auto r = golden_max(f, th[i], th[i + 1], theta_tol, out.evals);
    if (r.second > best) best = r.second, best_t = r.first;
  }
  Real gap = 0;
  if (upper)
    for (int i = 0; i < cells; ++i)
      if (!refine[i]) gap = std::max(gap, ub[i] - best);
  out.value = RealScalar(best, 0);
  out.theta = best_t;
  out.gap_bound = gap;
  out.certified = upper != nullptr;
  return out;
}

/// Uniform scan of f on [a, b] followed by refine_scan without bounds.
template <class F>
HValue scan_and_refine(const F& f, const Real& a, const Real& b, int cells, const Real& theta_tol) {
  std::vector<Real> th(cells + 1), v(cells + 1);
  for (int i = 0; i <= cells; ++i) {
    th[i] = a + (b - a) * i / cells;
    v[i] = f(th[i]);
  }
  return refine_scan(f, th, v, theta_tol, nullptr);
}

}  // namespace detail

/// H(x1, x2) = sup of h_l along gamma(x1, x2), by a 256-cell scan of the
/// polar parametrization plus golden-section refinement. When l >= l0 the
/// certificate |h - Im| <= sup_cert confines the search to the window
/// r sin(theta) >= r - 2 sup_cert, and Lip(h - Im) bounds every scan cell.
/// The scan is symmetric about the top point c + ir, which is sampled
/// exactly, so h = Im gives H = H0 with no rounding.
inline HValue compute_H(const TruncatedHeight& th, const Real& x1, const Real& x2,
                        Real tol = Real(1e-20)) {
  const Real r = abs(x2 - x1) / 2, c = (x1 + x2) / 2;
  if (r < th.l)
    throw Error(ErrorCode::OutsideU_l, "|x2 - x1| = " + to_decimal(2 * r, 12) + " < 2l = " +
                                           to_decimal(2 * th.l, 12));
  const Real half_pi = pi() / 2;
  Real wl = half_pi - asin(std::min(Real(1), th.l / r));
  const bool certified = th.l >= th.base.l0;
  const Real lip = th.base.lip_cert;
  if (certified) {
    Real s = 2 * th.base.sup_cert / r;
    Real w = s >= 2 ? pi() : acos(1 - s);
    wl = std::min(wl, w);
  }
  auto f = [&](const Real& t) { return th(HPoint{c + r * cos(t), r * sin(t)}); };
  const Real theta_tol = tol / (r * (1 + lip));
  HValue out;
  if (wl <= theta_tol) {
    out.value = RealScalar(th(HPoint{c, r}), tol);
    out.theta = half_pi;
    out.certified = certified;
    out.evals = 1;
    return out;
  }
  const int half = 128, cells = 2 * half;
  const Real step = wl / half, cs = cos(step), sn = sin(step);
  std::vector<Real> t(cells + 1), cosv(cells + 1), sinv(cells + 1), v(cells + 1);
  cosv[half] = 0, sinv[half] = 1, t[half] = half_pi;
  for (int k = 1; k <= half; ++k) {
    // Rotate the unit vector by -step (right side) and +step (left side).
    Real pc = cosv[half + k - 1], ps = sinv[half + k - 1];
    cosv[half + k] = pc * cs + ps * sn, sinv[half + k] = ps * cs - pc * sn;
    cosv[half - k] = -cosv[half + k], sinv[half - k] = sinv[half + k];
    t[half + k] = half_pi - step * k, t[half - k] = half_pi + step * k;
  }
  std::reverse(t.begin(), t.end());
  std::reverse(cosv.begin(), cosv.end());
  std::reverse(sinv.begin(), sinv.end());
  for (int i = 0; i <= cells; ++i) v[i] = th(HPoint{c + r * cosv[i], r * sinv[i]});
  std::function<Real(int)> ub = [&](int i) {
    // max r sin on the cell + max of h - Im at the ends + Lip * arc / 2.
    Real top = (i == half || i == half - 1) ? r : r * std::max(sinv[i], sinv[i + 1]);
    Real g = std::max(v[i] - r * sinv[i], v[i + 1] - r * sinv[i + 1]);
    return top + g + lip * r * step / 2;
  };
  out = detail::refine_scan(f, t, v, theta_tol, certified ? &ub : nullptr);
  out.value.err = tol;
  if (certified && abs(out.value.value - r) > th.base.sup_cert + tol)
    throw Error(ErrorCode::BoundViolated, "|H - H0| exceeds the sup certificate of h");
  return out;
}

inline Real H0(const Real& x1, const Real& x2) { return abs(x2 - x1) / 2; }

// ---------------------------------------------------------------- norms

struct NormsReport {
  Real l = 0;
  long samples = 0;
  std::uint64_t seed = 0;
  Real sup_est = 0, lip_est = 0;      // sampled |H - H0| and |dG|/|d|
  Real lip_v_est = 0, lip_w_est = 0;  // along (1, 1) and (-1, 1)
  Real sup_bound = 0, lip_bound = 0;
  Real lip_v_bound = 0, lip_w_bound = 0;
  Real slack = 0;  // optimizer allowance added to the comparisons
};

/// Sampled lower estimates of sup |H - H0| and Lip(H - H0) on U_l against
/// sup_cert and (sqrt 2 + sqrt 2 / l) ||h - Im||_Lip. Pairs are at distance
/// in [1e-3, 0.5]; every `directional_every`-th pair also tests shifts
/// along (1, 1) and (-1, 1).
inline NormsReport perturbation_norms(const HeightFunction& h, const Real& l, long samples,
                                      std::uint64_t seed = 1, Real tol = Real(1e-16),
                                      int directional_every = 4) {
  if (samples < 1000) throw Error(ErrorCode::PreconditionFailed, "at least 1000 samples");
  if (l < h.l0)
    throw Error(ErrorCode::PreconditionFailed, "l below l0: the certificate does not apply");
  const IdealPolygonDomain& D = *h.domain;
  TruncatedHeight th{h, l};
  NormsReport R;
  R.l = l;
  R.samples = samples;
  R.seed = seed;
  const Real cert = h.certified_lip_norm(), s2 = sqrt(Real(2));
  R.sup_bound = h.sup_cert;
  R.lip_bound = (s2 + s2 / l) * cert;
  R.lip_v_bound = cert / s2;
  R.lip_w_bound = (1 / s2 + s2 / l) * cert;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uc(0, 1), ur(0, 8), ulog(std::log(1e-3), std::log(0.5));
  std::uniform_real_distribution<double> ua(0, 2 * 3.14159265358979323846);
  const Real mu = D.mu.value, min_d = Real(1e-3);
  auto G = [&](const Real& a, const Real& b) { return compute_H(th, a, b, tol).value.value - H0(a, b); };
  auto in_U = [&](const Real& a, const Real& b) { return abs(b - a) >= 2 * l; };
  for (long n = 0; n < samples; ++n) {
    Real c = mu * Real(uc(rng)), r = l + Real(ur(rng));
    Real x1 = c - r, x2 = c + r;
    if (uc(rng) < 0.5) std::swap(x1, x2);
    Real g = G(x1, x2);
    R.sup_est = std::max(R.sup_est, abs(g));
    Real y1, y2, d;
    do {
      d = Real(std::exp(ulog(rng)));
      Real ang = Real(ua(rng));
      y1 = x1 + d * cos(ang);
      y2 = x2 + d * sin(ang);
    } while (!in_U(y1, y2));
    Real gy = G(y1, y2);
    R.sup_est = std::max(R.sup_est, abs(gy));
    R.lip_est = std::max(R.lip_est, abs(gy - g) / d);
    if (directional_every <= 0 || n % directional_every != 0) continue;
    Real t = d / s2;
    R.lip_v_est = std::max(R.lip_v_est, abs(G(x1 + t, x2 + t) - g) / d);
    Real sgn = x2 > x1 ? 1 : -1;  // widen, so the pair stays in U_l
    R.lip_w_est = std::max(R.lip_w_est, abs(G(x1 - sgn * t, x2 + sgn * t) - g) / d);
  }
  R.slack = 4 * tol / min_d + 4 * tol;
  auto check = [&](const Real& est, const Real& bound, const char* what) {
    if (est > bound + R.slack)
      throw Error(ErrorCode::BoundViolated, std::string(what) + ": sampled " + to_decimal(est, 10) +
                                                " exceeds bound " + to_decimal(bound, 10));
  };
  check(R.sup_est, R.sup_bound, "sup |H - H0|");
  check(R.lip_est, R.lip_bound, "Lip(H - H0)");
  if (directional_every > 0) {
    check(R.lip_v_est, R.lip_v_bound, "Lip along (1,1)");
    check(R.lip_w_est, R.lip_w_bound, "Lip along (-1,1)");
  }
  return R;
}

// ---------------------------------------------------------------- core region

/// Ball B(N, xi) in H coordinates: the half-disc |z - c| < R for a finite
/// vertex, or its exterior |z - c| > R for the vertex at infinity.
struct VertexBall {
  Real c = 0, R = 0;
  bool exterior = false;
  bool contains(const HPoint& z) const {
    Real dx = z.x - c, d2 = dx * dx + z.y * z.y;
    return exterior ? d2 > R * R : d2 < R * R;
  }
};

/// F_N = closure(F) minus the balls at the vertices whose boundary arcs have
/// length delta_N (the shortest arc of a cuspidal word of N+1 letters), and
/// the sets entering the excursion bound built from it.
struct CoreRegion {
  int N = 0;
  Real delta_N = 0;
  std::vector<SideGeodesic> sides;
  std::vector<VertexBall> balls;
  std::vector<Word> words;        // cuspidal words of length <= N, empty word first
  std::vector<HPoint> boundary;   // samples of the boundary of F_N
  Real eps_N = 0;                 // min Im over g_w K_N and g_u^-1 g_v^-1 K_N
  Real top = 0;                   // max Im over F_N

  bool in_F(const HPoint& z, Real tol = Real(1e-24)) const { return in_closed_domain(sides, z, tol); }
  bool in_F_N(const HPoint& z, Real tol = Real(1e-24)) const {
    if (!in_F(z, tol)) return false;
    for (auto& b : balls) {
      VertexBall s = b;
      s.R = b.exterior ? b.R * (1 + tol) : b.R * (1 - tol);
      if (s.contains(z)) return false;
    }
    return true;
  }
};

inline std::vector<Word> cuspidal_words(const IdealPolygonDomain& D, int max_len) {
  std::vector<Word> out{Word{}};
  std::vector<Word> layer{Word{}};
  for (int n = 1; n <= max_len; ++n) {
    std::vector<Word> next;
    for (const Word& w : layer)
      for (Letter a : D.letters()) {
        if (!w.empty() && a == w.back().inv()) continue;
        Word u = w;
        u.push_back(a);
        if (u.size() == 1 || is_cuspidal(D, u) != CuspKind::no) next.push_back(u);
      }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

inline CoreRegion core_region(const IdealPolygonDomain& D, int N, int samples = 400) {
  if (N < 1) throw Error(ErrorCode::PreconditionFailed, "N must be positive");
  CoreRegion C;
  C.N = N;
  C.sides = domain_sides(D);
  C.delta_N = two_pi();
  for (const Word& w : cuspidal_words(D, N + 1))
    if ((int)w.size() == N + 1) C.delta_N = std::min(C.delta_N, arc_of_word(D, w).length());
  C.words = cuspidal_words(D, N);
  for (const DiskPoint& v : D.vertices) {
    ExtendedReal a = inv_cayley(DiskPoint(v.angle.value - C.delta_N));
    ExtendedReal b = inv_cayley(DiskPoint(v.angle.value + C.delta_N));
    if (a.is_inf() || b.is_inf()) throw Error(ErrorCode::PreconditionFailed, "delta_N too large");
    VertexBall B;
    B.c = (a.value() + b.value()) / 2;
    B.R = abs(b.value() - a.value()) / 2;
    ExtendedReal vx = inv_cayley(v);
    B.exterior = vx.is_inf() || !(abs(vx.value() - B.c) < B.R);
    C.balls.push_back(B);
  }
  // Boundary samples: sides of F and ball circles, kept where they bound F_N.
  auto keep = [&](const HPoint& z) {
    if (z.y > 0 && C.in_F_N(z, Real(1e-20))) C.boundary.push_back(z);
  };
  Real ymax = 1;
  for (auto& b : C.balls) ymax = std::max(ymax, b.c + b.R + abs(b.c));
  for (auto& s : C.sides)
    for (int i = 1; i < samples; ++i) {
      Real t = Real(i) / samples;
      if (s.vertical) keep(HPoint{s.v, ymax * t});
      else keep(HPoint{s.c + s.R * cos(pi() * t), s.R * sin(pi() * t)});
    }
  for (auto& b : C.balls)
    for (int i = 1; i < samples; ++i) {
      Real t = pi() * i / samples;
      keep(HPoint{b.c + b.R * cos(t), b.R * sin(t)});
    }
  if (C.boundary.empty()) throw Error(ErrorCode::PreconditionFailed, "F_N is empty");
  for (auto& z : C.boundary) C.top = std::max(C.top, z.y);
  // The hull of a set has the same minimum of Im as the set, so eps_N is a
  // minimum over images of the boundary samples.
  std::vector<MoebiusMap> maps;
  std::vector<MoebiusMap> inv;
  for (const Word& w : C.words) {
    MoebiusMap g = w.empty() ? MoebiusMap::identity() : word_map(D, w);
    maps.push_back(g);
    inv.push_back(inverse(g));
  }
  Real eps = C.top;
  for (auto& g : maps)
    for (auto& z : C.boundary) eps = std::min(eps, g.apply_h(z).y);
  for (auto& gu : inv)
    for (auto& gv : inv) {
      MoebiusMap g = compose(gu, gv);
      for (auto& z : C.boundary) eps = std::min(eps, g.apply_h(z).y);
    }
  C.eps_N = eps;
  return C;
}

/// Point where gamma(x, y) crosses the side s.
inline HPoint cross_side(const Real& x, const Real& y, const SideGeodesic& s) {
  const Real c = (x + y) / 2, r = abs(y - x) / 2;
  Real X;
  if (s.vertical) {
    X = s.v;
  } else {
    if (abs(s.c - c) == 0) throw Error(ErrorCode::DoesNotMeetDomain, "concentric with side");
    X = (r * r - s.R * s.R + s.c * s.c - c * c) / (2 * (s.c - c));
  }
  Real Y2 = r * r - (X - c) * (X - c);
  if (!(Y2 > 0)) throw Error(ErrorCode::DoesNotMeetDomain, "geodesic misses the side");
  return {X, sqrt(Y2)};
}

struct CoreEntry {
  long r = 0, n = 0;
  int length = 0;
  HPoint start, end;  // F_r gamma(t_{n(r)}) and F_r gamma(t_{n(r+1)})
  bool start_in_F_N = false;
};

struct CoreReport {
  int N = 0;
  Real delta_N = 0, eps_N = 0;
  Real min_im = 0;
  std::vector<CoreEntry> entries;
  bool pass = false;
};

/// For r in [r_lo, r_hi], with blocks C_{r-1}, C_r, C_{r+1} of length <= N:
/// F_r gamma(t_{n(r)}) is the exit point of the normalized geodesic at n(r)
/// through the side s_{a_{n(r)}} and must lie in F_N; the segment end is
/// G_r applied to the next exit point.
inline CoreReport core_region_check(const IdealPolygonDomain& D, int N,
                                    const BiInfiniteWordSpec& w, long r_lo, long r_hi,
                                    const CoreRegion* region = nullptr) {
  std::unique_ptr<CoreRegion> own;
  if (!region || region->N != N) {
    own = std::make_unique<CoreRegion>(core_region(D, N));
    region = own.get();
  }
  const CoreRegion& C = *region;
  auto blocks = cuspidal_decomposition(D, w, r_lo - 1, r_hi + 2);
  auto idx = [&](long r) { return (size_t)(r - (r_lo - 1)); };
  for (long r = r_lo - 1; r <= r_hi + 1; ++r)
    if ((int)blocks[idx(r)].word.size() > N)
      throw IndexedError(ErrorCode::BlockTooLong, r,
                         "cuspidal block of length " +
                             std::to_string(blocks[idx(r)].word.size()) + " > N");
  // The greedy blocks can split a long cuspidal factor (b~ e | e e e e), so
  // factors of N + 1 letters are checked directly as well.
  {
    const long lo = blocks.front().start;
    const long hi = blocks.back().start + (long)blocks.back().word.size();
    long r = r_lo - 1;
    for (long i = lo; i + N + 1 <= hi; ++i) {
      while (r + 1 <= r_hi + 1 && blocks[idx(r + 1)].start <= i) ++r;
      Word f;
      for (long j = i; j <= i + N; ++j) f.push_back(w.letter(D, j));
      if (is_cuspidal(D, f) != CuspKind::no)
        throw IndexedError(ErrorCode::BlockTooLong, r,
                           "cuspidal factor of length " + std::to_string(N + 1) + " at " +
                               std::to_string(i));
    }
  }
  auto exit_point = [&](long n) {
    NormalizedGeodesic g = normalized_geodesic(D, w, n);
    if (g.geodesic.backward.is_inf() || g.geodesic.forward.is_inf())
      throw IndexedError(ErrorCode::PoleProximity, n, "endpoint at infinity");
    return cross_side(g.geodesic.backward.value(), g.geodesic.forward.value(),
                      C.sides[w.letter(D, n).id()]);
  };
  CoreReport R;
  R.N = N;
  R.delta_N = C.delta_N;
  R.eps_N = C.eps_N;
  R.min_im = -1;
  bool ok = true;
  for (long r = r_lo; r <= r_hi; ++r) {
    const CuspidalBlock& b = blocks[idx(r)];
    CoreEntry e;
    e.r = r;
    e.n = b.start;
    e.length = (int)b.word.size();
    e.start = exit_point(b.start);
    e.end = word_map(D, b.word).apply_h(exit_point(blocks[idx(r + 1)].start));
    e.start_in_F_N = C.in_F_N(e.start, Real(1e-18));
    ok = ok && e.start_in_F_N;
    for (Real y : {e.start.y, e.end.y}) {
      if (R.min_im < 0 || y < R.min_im) R.min_im = y;
      ok = ok && y >= C.eps_N;
    }
    R.entries.push_back(e);
  }
  R.pass = ok;
  return R;
}

// ---------------------------------------------------------------- proper mode constants

struct ProperConstants {
  int N = 0;
  Real eps = 0;       // stable gap parameter satisfying the Lipschitz condition
  Real l = 0;
  Real lip_H = 0;     // certified Lip(H - H0) on U_l
  Real sup_H = 0;     // certified sup |H - H0| on U_l
  Real delta_G = 0;
  Real overlap = 0;   // (M_N - m_N) - (mu/2 + 2 sup_H), must be >= 0
  long s0 = 1, M0 = 1;
  Real eps_N = 0;
  RealScalar C1, C2;
  Extrema ext;
};

namespace detail {

/// Max of h over a point set, with the largest neighbour difference at the
/// argmax as grid-gap error.
inline RealScalar grid_max(const HeightFunction& h, const std::vector<HPoint>& pts) {
  Real best = -1, err = 0;
  std::vector<Real> v(pts.size());
  size_t arg = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    v[i] = h(pts[i]);
    if (v[i] > best) best = v[i], arg = i;
  }
  if (arg > 0) err = std::max(err, abs(v[arg] - v[arg - 1]));
  if (arg + 1 < v.size()) err = std::max(err, abs(v[arg] - v[arg + 1]));
  return RealScalar(best, err);
}

}  // namespace detail

/// C1 = max h over the hull K_N, estimated on images g_w F_N plus geodesic
/// segments between the highest sampled points.
inline RealScalar estimate_C1(const IdealPolygonDomain& D, const HeightFunction& h,
                              const CoreRegion& C, int top_k = 120, int seg = 16) {
  std::vector<HPoint> T;
  for (const Word& w : C.words) {
    MoebiusMap g = w.empty() ? MoebiusMap::identity() : word_map(D, w);
    for (auto& z : C.boundary) T.push_back(g.apply_h(z));
  }
  RealScalar best = detail::grid_max(h, T);
  std::sort(T.begin(), T.end(), [](const HPoint& a, const HPoint& b) { return a.y > b.y; });
  T.resize(std::min<size_t>(T.size(), top_k));
  for (size_t i = 0; i < T.size(); ++i)
    for (size_t j = i + 1; j < T.size(); ++j) {
      const HPoint &p = T[i], &q = T[j];
      if (abs(p.x - q.x) < Real(1e-12)) continue;
      // Circle through p and q centred on the real axis.
      Real c = (q.x * q.x + q.y * q.y - p.x * p.x - p.y * p.y) / (2 * (q.x - p.x));
      Real R = sqrt((p.x - c) * (p.x - c) + p.y * p.y);
      Real a = atan2(p.y, p.x - c), b = atan2(q.y, q.x - c);
      std::vector<HPoint> s;
      for (int k = 1; k < seg; ++k) {
        Real t = a + (b - a) * k / seg;
        s.push_back({c + R * cos(t), R * sin(t)});
      }
      RealScalar v = detail::grid_max(h, s);
      if (v.value > best.value) best = v;
    }
  return best;
}

/// C2 = max h over eps_N <= Im z <= l, one period in Re z, on a grid with
/// geometric spacing in Im and three local refinements.
inline RealScalar estimate_C2(const IdealPolygonDomain& D, const HeightFunction& h,
                              const Real& eps_N, const Real& l, int nx = 256, int ny = 96) {
  const Real mu = D.mu.value;
  Real x0 = -mu / 2, x1 = mu / 2, y0 = eps_N, y1 = l;
  RealScalar best(-1, 0);
  HPoint arg{0, l};
  for (int round = 0; round < 4; ++round) {
    std::vector<HPoint> pts;
    const Real ly0 = log(y0), ly1 = log(y1);
    for (int i = 0; i <= nx; ++i)
      for (int j = 0; j <= ny; ++j)
        pts.push_back({x0 + (x1 - x0) * i / nx, exp(ly0 + (ly1 - ly0) * j / ny)});
    RealScalar v = detail::grid_max(h, pts);
    if (v.value >= best.value) {
      Real e = round == 0 ? v.err : std::min(v.err, best.err);
      best = RealScalar(v.value, e);
    }
    for (auto& p : pts)
      if (h(p) == v.value) {
        arg = p;
        break;
      }
    Real dx = (x1 - x0) / nx * 2, ry = exp((ly1 - ly0) / ny * 2);
    x0 = arg.x - dx, x1 = arg.x + dx;
    y0 = std::max(eps_N, arg.y / ry), y1 = std::min(l, arg.y * ry);
    if (!(y1 > y0)) break;
  }
  return best;
}

struct ProperOptions {
  Real solver_tol = Real(1e-14);
  Real H_tol = Real(1e-20);
  long budget = 2000;
  int n0 = -1;           // computed when negative
  int core_samples = 200;
};

/// Certificate checks and the threshold constants N, s0, M0 by search.
inline ProperConstants proper_constants(const IdealPolygonDomain& D, const HeightFunction& h,
                                        const ProperOptions& opt = {}) {
  ProperConstants K;
  K.delta_G = delta_G(D);
  K.l = h.l0;
  if (h.l0 < D.margulis.value)
    throw Error(ErrorCode::PreconditionFailed,
                "l0 = " + to_decimal(h.l0, 8) + " is below m; precise invariance needs l >= m");
  const Real cert = h.certified_lip_norm();
  if (!(cert < K.delta_G))
    throw Error(ErrorCode::CertificateTooWeak, "||h - Im||_Lip <= " + to_decimal(cert, 10) +
                                                   " is not below delta_G = " +
                                                   to_decimal(K.delta_G, 10));
  const Real s2 = sqrt(Real(2));
  K.lip_H = (s2 + s2 / K.l) * cert;
  K.sup_H = h.sup_cert;
  // Smallest eps on a 0.05 ladder with (1 - 2 Lip)/(1 + 2 Lip) > 1 - eps.
  const Real ratio = (1 - 2 * K.lip_H) / (1 + 2 * K.lip_H);
  K.eps = 0;
  for (int i = 2; i < 20; ++i)
    if (ratio > 1 - Real(i) / 20) {
      K.eps = Real(i) / 20;
      break;
    }
  if (K.eps == 0)
    throw Error(ErrorCode::LipConditionFailed, "no eps < 1 satisfies the Lipschitz condition");
  int N = opt.n0 >= 0 ? opt.n0 : find_n0(D, K.eps, opt.budget).N0;
  const Real mu = D.mu.value;
  // Overlapping condition M_N - m_N >= mu/2 + 2 sup_H, raising N if needed.
  for (;; ++N) {
    K.ext = extrema(CantorSpec(D, N));
    K.overlap = (K.ext.M.value - K.ext.m.value) - (mu / 2 + 2 * K.sup_H);
    if (K.overlap >= 0) break;
    if (N > 60) throw Error(ErrorCode::StableGapNotSatisfied, "overlap condition never holds");
  }
  K.N = N;
  // K_N x K_N^s inside U_l: m + s mu - M >= 2 l.
  K.s0 = std::max<long>(1, (long)ceil((2 * K.l + K.ext.M.value - K.ext.m.value) / mu));
  CoreRegion C = core_region(D, N, opt.core_samples);
  K.eps_N = C.eps_N;
  K.C1 = estimate_C1(D, h, C);
  K.C2 = estimate_C2(D, h, C.eps_N, K.l);
  Real need = std::max({K.l, K.C1.hi() + K.delta_G, K.C2.hi() + K.delta_G});
  K.M0 = std::max<long>(1, (long)ceil(2 * need / mu + 1));
  return K;
}

/// HeightTarget over h_l with the certified norms of H - H0.
inline HeightTarget height_target(const HeightFunction& h, const Real& l, const Real& lip_H,
                                  const Real& sup_H, const Real& tol) {
  TruncatedHeight th{h, l};
  HeightTarget H;
  H.eval = [th, tol](const Real& a, const Real& b) { return compute_H(th, a, b, tol).value.value; };
  H.lip = lip_H;
  H.sup_norm = sup_H;
  H.name = "H[" + h.name + "]";
  return H;
}

// ---------------------------------------------------------------- H-intervals

/// H(K_N x K_N^s) = [H(M, m + s mu), H(m, M + s mu)]: corners from the
/// monotonicity of H (|d(H - H0)| < 1/2), edges scanned to confirm, and
/// seeded targets decomposed back through the stable Hall solver.
struct HIntervalReport {
  Interval range;
  Real edge_lo = 0, edge_hi = 0;  // extrema of the edge scan
  Interval next;                  // the same interval for s + 1
  bool overlaps_next = false;
  long round_trips = 0;
  Real max_residual = 0;
};

inline HIntervalReport h_interval(const HeightFunction& h, const CantorSpec& spec, long s,
                                  const Real& eps, int n0 = -1, int targets = 25,
                                  std::uint64_t seed = 1, Real tol = Real(1e-12)) {
  const IdealPolygonDomain& D = spec.domain;
  const Real s2 = sqrt(Real(2));
  const Real lip_H = (s2 + s2 / h.l0) * h.certified_lip_norm();
  if (!((1 - 2 * lip_H) / (1 + 2 * lip_H) > 1 - eps))
    throw Error(ErrorCode::LipConditionFailed,
                "(1 - 2 Lip)/(1 + 2 Lip) <= 1 - eps for Lip(H - H0) <= " + to_decimal(lip_H, 8));
  HeightTarget H = h.exact ? HeightTarget::exact() : height_target(h, h.l0, lip_H, h.sup_cert, Real(1e-20));
  HeightDecomposer hd(spec, eps, n0 < 0 ? spec.N : n0);
  HIntervalReport R;
  R.range = hd.perturbed_range(H, s);
  R.next = hd.perturbed_range(H, s + 1);
  R.overlaps_next = R.next.lo <= R.range.hi;
  const Extrema ext = extrema(spec);
  const Real m = ext.m.value, M = ext.M.value, sm = Real(s) * D.mu.value;
  R.edge_lo = R.range.hi, R.edge_hi = R.range.lo;
  const int n = 32;
  for (int i = 0; i <= n; ++i) {
    Real t = m + (M - m) * i / n;
    for (Real v : {H.eval(m, t + sm), H.eval(M, t + sm), H.eval(t, m + sm), H.eval(t, M + sm)}) {
      R.edge_lo = std::min(R.edge_lo, v);
      R.edge_hi = std::max(R.edge_hi, v);
    }
  }
  if (R.edge_lo < R.range.lo - tol || R.edge_hi > R.range.hi + tol)
    throw Error(ErrorCode::BoundViolated, "edge scan leaves the corner interval");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < targets; ++k) {
    Real L = R.range.lo + (R.range.hi - R.range.lo) * Real(u(rng));
    HeightDecomposition d = hd.perturbed(L, H, Real(1e-14), s);
    if (d.s != s) throw Error(ErrorCode::TargetOutOfRange, "target decomposed at another s");
    R.max_residual = std::max(R.max_residual, d.residual);
    ++R.round_trips;
  }
  return R;
}

// ---------------------------------------------------------------- proper witness

struct ProperSetup {
  ProperConstants K;
  HeightTarget H;
  long s_min = 1;
  Real threshold = 0;  // L must be at least this (strictly above for h = Im)
  bool degenerate = false;
};


/// Proper-mode targets are values of limsup h, so for h = Im a target L
/// corresponds to the Lagrange value 2L of the Hall construction.
inline ProperSetup proper_setup(const IdealPolygonDomain& D, const HeightFunction& h,
                                const ProperOptions& opt = {}) {
  ProperSetup P;
  const Real mu = D.mu.value;
  if (h.exact) {
    P.degenerate = true;
    P.K.delta_G = delta_G(D);
    P.K.l = h.l0;
    P.K.eps = Real(0.1);
    P.K.N = opt.n0 >= 0 ? opt.n0 : find_n0(D, P.K.eps, opt.budget).N0;
    P.K.ext = extrema(CantorSpec(D, P.K.N));
    P.K.overlap = (P.K.ext.M.value - P.K.ext.m.value) - mu / 2;
    P.H = HeightTarget::exact();
    P.threshold = Real(P.K.N + 1) * mu / 2;
    return P;
  }
  P.K = proper_constants(D, h, opt);
  P.H = height_target(h, P.K.l, P.K.lip_H, P.K.sup_H, opt.H_tol);
  P.s_min = std::max(P.K.s0, P.K.M0);
  HeightDecomposer hd(CantorSpec(D, P.K.N), P.K.eps, P.K.N, opt.budget);
  P.threshold = std::max(hd.perturbed_range(P.H, P.K.s0).lo, hd.perturbed_range(P.H, P.K.M0).lo);
  // Consecutive H-ranges must overlap before any covering claim.
  for (long s = P.s_min; s < P.s_min + 3; ++s)
    if (hd.perturbed_range(P.H, s).hi < hd.perturbed_range(P.H, s + 1).lo)
      throw Error(ErrorCode::TargetOutOfRange, "H-ranges for s and s+1 do not overlap");
  return P;
}

struct ProperWitness {
  ProperSetup setup;
  HeightDecomposition dec;
  WitnessSpec spec;
  Real L = 0;
  Real H_streams = 0;  // H(x1', x2' + s mu) for the stream points used
};

inline ProperWitness proper_witness(const IdealPolygonDomain& D, const HeightFunction& h,
                                    const Real& L, const ProperOptions& opt = {}) {
  ProperWitness W;
  W.setup = proper_setup(D, h, opt);
  W.L = L;
  const ProperSetup& P = W.setup;
  if (P.degenerate ? !(L > P.threshold) : L < P.threshold)
    throw Error(ErrorCode::BelowThreshold, "L = " + to_decimal(L, 12) + " below the threshold " +
                                               to_decimal(P.threshold, 12));
  HeightDecomposer hd(CantorSpec(D, P.K.N), P.K.eps, P.K.N, opt.budget);
  // The solver runs on the half-scaled sets, so tol/2 matches sum mode.
  W.dec = hd.perturbed(L, P.H, opt.solver_tol / 2, P.s_min);
  const Real mu = D.mu.value;
  W.spec = assemble_witness(D, P.K.N, W.dec.s, W.dec.x1, W.dec.x2,
                            Real(W.dec.s) * mu + W.dec.x2 - W.dec.x1);
  W.H_streams = P.H.eval(W.spec.b.point, W.spec.a.point + Real(W.dec.s) * mu);
  return W;
}

/// Parameter interval [a, b] of z = c + r e^{i theta} where gamma(x, y)
/// lies in the closure of F. F is convex, so the side crossings cut the
/// semicircle into pieces of which exactly one is inside.
struct Chord {
  Real c = 0, r = 0, a = 0, b = 0;
  Real top = 0;  // max Im on the chord
};

inline Chord chord_in_domain(const std::vector<SideGeodesic>& sides, const Real& x, const Real& y) {
  Chord ch;
  ch.c = (x + y) / 2, ch.r = abs(y - x) / 2;
  std::vector<Real> cuts{Real(0), pi()};
  for (const auto& s : sides) {
    try {
      HPoint p = cross_side(x, y, s);
      cuts.push_back(atan2(p.y, p.x - ch.c));
    } catch (const Error&) {
    }
  }
  std::sort(cuts.begin(), cuts.end());
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    Real t = (cuts[i] + cuts[i + 1]) / 2;
    if (!(cuts[i + 1] > cuts[i])) continue;
    if (in_closed_domain(sides, HPoint{ch.c + ch.r * cos(t), ch.r * sin(t)})) {
      ch.a = cuts[i], ch.b = cuts[i + 1];
      const Real h = pi() / 2;
      ch.top = ch.a <= h && h <= ch.b ? ch.r : ch.r * std::max(sin(ch.a), sin(ch.b));
      return ch;
    }
  }
  throw Error(ErrorCode::DoesNotMeetDomain, "geodesic misses F");
}

/// Sup of h along a chord, by scan plus golden refinement.
inline RealScalar chord_sup(const HeightFunction& h, const Chord& ch, Real tol = Real(1e-18)) {
  auto f = [&](const Real& t) { return h(HPoint{ch.c + ch.r * cos(t), ch.r * sin(t)}); };
  HValue v = detail::scan_and_refine(f, ch.a, ch.b, 64, tol / (ch.r + 1));
  return RealScalar(v.value.value, tol);
}

inline RealScalar chord_sup(const HeightFunction& h, const std::vector<SideGeodesic>& sides,
                            const Real& x, const Real& y, Real tol = Real(1e-18)) {
  return chord_sup(h, chord_in_domain(sides, x, y), tol);
}

struct ProperWindow {
  long k = 0, r = 0;
  RealScalar formula;   // H(x_{r_k}, y_{r_k})
  Real formula_gap = 0; // unrefined-cell allowance of the formula evaluation
  RealScalar windowed;  // max of chord sups over j in [r_k - 1, r_k + s]
  long chords_evaluated = 0;
};

struct ProperReport {
  std::vector<ProperWindow> windows;
  RealScalar off_max;  // chord sups away from every special segment
  long off_argmax = 0;
  long chords = 0;
  Real final_deviation = 0;  // max over |k| = k_blocks of |formula - L|
  Real windowed_diff = 0;    // max |windowed - formula|
  Real windowed_gap = 0;     // the same beyond the optimizer allowance
  Real stream_err = 0;       // |H(x1', x2' + s mu) - L|
  std::vector<std::string> failures;
  bool pass = false;
};

/// Evaluates h along the witness geodesic window by window. For the eta run
/// at r_k the normalized geodesics are gamma_{r+i} = gamma_r - i mu, so their
/// chords inside F are read off one geodesic; chords whose top cannot beat
/// the running best by more than sup |h - Im| on F are skipped. Windows
/// between runs, at least N+1 letters away from them, must stay <= L.
inline ProperReport verify_proper_witness(const IdealPolygonDomain& D, const HeightFunction& h,
                                          const ProperWitness& W, int k_blocks,
                                          Real tol = Real(1e-4)) {
  if (k_blocks < 3) throw Error(ErrorCode::PreconditionFailed, "k_blocks must be at least 3");
  ProperReport R;
  const WitnessSpec& w = W.spec;
  const auto sides = domain_sides(D);
  BiInfiniteWordSpec bw = w.bi_word(D);
  const Real L = W.L, mu = D.mu.value;
  const int depth = (int)std::min<long>(w.s + 400, 1L << 30);
  const Real geo_tol = Real(1e-25);
  R.stream_err = abs(W.H_streams - L);
  TruncatedHeight th{h, W.setup.K.l};
  const long pad = w.N + 1;
  Real offmax = -1, offerr = 0;
  for (long k = -k_blocks; k <= k_blocks; ++k) {
    const long r = w.r(k);
    NormalizedGeodesic g = normalized_geodesic(D, bw, r, geo_tol, depth);
    const Real x = g.geodesic.backward.value(), y = g.geodesic.forward.value();
    const Real endpoint_err = g.err_backward + g.err_forward;
    ProperWindow pw;
    pw.k = k;
    pw.r = r;
    if (W.setup.degenerate) {
      pw.formula = RealScalar(H0(x, y), endpoint_err);
    } else {
      HValue hv = compute_H(th, x, y);
      pw.formula = RealScalar(hv.value.value, endpoint_err * (1 + W.setup.H.lip) + hv.value.err);
      pw.formula_gap = hv.gap_bound;
    }
    std::vector<Chord> chords;
    NormalizedGeodesic gm = normalized_geodesic(D, bw, r - 1, geo_tol, depth);
    chords.push_back(chord_in_domain(sides, gm.geodesic.backward.value(),
                                     gm.geodesic.forward.value()));
    for (long i = 0; i <= w.s; ++i)
      chords.push_back(chord_in_domain(sides, x - Real(i) * mu, y - Real(i) * mu));
    std::sort(chords.begin(), chords.end(),
              [](const Chord& a, const Chord& b) { return a.top > b.top; });
    Real best = -1;
    for (const Chord& ch : chords) {
      if (ch.top + h.sup_cert < best) break;
      best = std::max(best, chord_sup(h, ch).value);
      ++pw.chords_evaluated;
    }
    R.chords += pw.chords_evaluated;
    pw.windowed = RealScalar(best, Real(1e-18));
    Real allow = pw.formula.err + pw.formula_gap + pw.windowed.err;
    const Real diff = abs(pw.windowed.value - pw.formula.value);
    R.windowed_diff = std::max(R.windowed_diff, diff);
    R.windowed_gap = std::max(R.windowed_gap, diff - allow);
    if (std::abs(k) == k_blocks)
      R.final_deviation = std::max(R.final_deviation, abs(pw.formula.value - L));
    R.windows.push_back(pw);
    if (k == k_blocks) break;
    for (long j = r + w.s + pad + 1; j < w.r(k + 1) - pad - 1; ++j) {
      NormalizedGeodesic gj;
      try {
        gj = normalized_geodesic(D, bw, j, geo_tol);
      } catch (const Error&) {
        gj = normalized_geodesic(D, bw, j, geo_tol, depth);  // the next run is within reach
      }
      RealScalar v = chord_sup(h, sides, gj.geodesic.backward.value(), gj.geodesic.forward.value());
      ++R.chords;
      if (v.value > offmax) offmax = v.value, offerr = v.err, R.off_argmax = j;
    }
  }
  R.off_max = RealScalar(offmax, offerr);
  if (R.final_deviation > Real(1e-6) + R.stream_err)
    R.failures.push_back("formula values miss the target");
  if (R.windowed_gap > tol) R.failures.push_back("windowed suprema disagree with the formula");
  if (offmax > L) R.failures.push_back("intermediate window exceeds L");
  R.pass = R.failures.empty();
  return R;
}

}  // namespace cusp
