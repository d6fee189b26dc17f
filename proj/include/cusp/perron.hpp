#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "cusp/domain.hpp"
#include "cusp/errors.hpp"
#include "cusp/expansion.hpp"

namespace cusp {

// ---------------------------------------------------------------- windows

struct WindowValue {
  RealScalar value;  // |y_j - x_j| / 2
  GeodesicH geodesic;
};

/// Naive height of the j-th normalized geodesic, with both endpoint errors.
inline WindowValue window_value(const IdealPolygonDomain& D, const BiInfiniteWordSpec& w, long j,
                                Real tol = Real(1e-25), int max_depth = 400) {
  NormalizedGeodesic g = normalized_geodesic(D, w, j, tol, max_depth);
  ExtendedReal h = naive_height(g.geodesic);
  if (h.is_inf()) throw IndexedError(ErrorCode::PoleProximity, j, "endpoint at infinity");
  return {RealScalar(h.value(), (g.err_backward + g.err_forward) / 2 + h.err()), g.geodesic};
}

/// Eventually periodic bi-infinite word: a_j = pre[j], then period repeating
/// for j >= 0; a_{-1}, a_{-2}, ... = neg_pre, then neg_period repeating.
/// `purely` builds the two-sided periodic word with a_j = period[j mod p].
struct PeriodicBiWord {
  Word neg_pre, neg_period;
  Word pre, period;

  static PeriodicBiWord purely(const Word& period) {
    if (period.empty()) throw Error(ErrorCode::InadmissibleWord, "empty period");
    Word cyc = period;
    cyc.insert(cyc.end(), period.begin(), period.end());
    if (!admissible(cyc)) throw Error(ErrorCode::InadmissibleWord, "period backtracks cyclically");
    PeriodicBiWord w;
    w.period = period;
    w.neg_period.assign(period.rbegin(), period.rend());
    return w;
  }

  BiInfiniteWordSpec spec() const {
    BiInfiniteWordSpec s{LetterStream::periodic(neg_pre, neg_period),
                         LetterStream::periodic(pre, period)};
    Letter first = pre.empty() ? period.front() : pre.front();
    Letter last = neg_pre.empty() ? neg_period.front() : neg_pre.front();
    if (first == last.inv()) throw Error(ErrorCode::InadmissibleWord, "junction backtracks");
    return s;
  }
};

struct HeightEstimate {
  RealScalar value;
  Real err = 0;
  std::vector<long> achieving_windows;
  bool below_margulis = false;  // value <= m: informational only
  long horizon = 0;

  RealScalar lagrange() const { return RealScalar(2 * value.value, 2 * err); }
};

/// limsup of the window values, as the max over one forward period starting
/// `horizon` letters past the preperiod (at least three periods). err adds
/// endpoint truncation and the change against the next period.
inline HeightEstimate essential_height(const IdealPolygonDomain& D, const PeriodicBiWord& w,
                                       long horizon = -1, Real tol = Real(1e-25)) {
  const long p = (long)w.period.size();
  const long start = (long)w.pre.size() + std::max(horizon, 3 * p);
  BiInfiniteWordSpec spec = w.spec();
  HeightEstimate out;
  out.horizon = start;
  Real best = -1, drift = 0, endpoint = 0;
  std::vector<Real> vals(p);
  for (long k = 0; k < p; ++k) {
    WindowValue a = window_value(D, spec, start + k, tol);
    WindowValue b = window_value(D, spec, start + k + p, tol);
    vals[k] = a.value.value;
    drift = std::max(drift, abs(a.value.value - b.value.value));
    endpoint = std::max(endpoint, a.value.err);
    best = std::max(best, a.value.value);
  }
  out.err = endpoint + drift;
  for (long k = 0; k < p; ++k)
    if (vals[k] >= best - 2 * out.err - 64 * eps() * best) out.achieving_windows.push_back(start + k);
  out.value = RealScalar(best, out.err);
  out.below_margulis = !(best > D.margulis.value);
  return out;
}

// ---------------------------------------------------------------- classical

/// Periodic continued fraction [0; c_0, c_1, ..., c_{k-1}, c_0, ...], the
/// positive root of the fixed-point quadratic of its matrix product.
inline Real periodic_cf_tail(const std::vector<long>& c) {
  if (c.empty()) throw Error(ErrorCode::PreconditionFailed, "empty period");
  // t -> 1/(c + t) is [[0, 1], [1, c]].
  Real a = 1, b = 0, cc = 0, d = 1;
  for (long ci : c) {
    if (ci < 1) throw Error(ErrorCode::PreconditionFailed, "partial quotients must be positive");
    Real na = b, nb = a + b * ci, nc = d, nd = cc + d * ci;
    a = na, b = nb, cc = nc, d = nd;
  }
  // t = (a t + b)/(cc t + d)  =>  cc t^2 + (d - a) t - b = 0
  Real B = d - a;
  Real disc = sqrt(B * B + 4 * cc * b);
  return B >= 0 ? 2 * b / (B + disc) : (disc - B) / (2 * cc);
}

/// L = max over n of [0; a_{n-1}, a_{n-2}, ...] + a_n + [0; a_{n+1}, ...].
inline RealScalar classical_cf_lagrange(const std::vector<long>& period) {
  if (period.empty()) throw Error(ErrorCode::PreconditionFailed, "empty period");
  const size_t k = period.size();
  Real best = 0;
  for (size_t n = 0; n < k; ++n) {
    std::vector<long> fwd, bwd;
    for (size_t i = 1; i <= k; ++i) {
      fwd.push_back(period[(n + i) % k]);
      bwd.push_back(period[(n + k - i) % k]);
    }
    best = std::max(best, Real(period[n]) + periodic_cf_tail(fwd) + periodic_cf_tail(bwd));
  }
  return RealScalar(best, 16 * eps() * best);
}

// ---------------------------------------------------------------- oracle

/// Cusp points g.oo = a/c of reduced words up to max_len with 0 < |c| <= c_max,
/// one representative per point (c > 0).
struct CuspPoint {
  Real a = 0, c = 0;
  Real x() const { return a / c; }
};

inline std::vector<CuspPoint> enumerate_cusp_points(const IdealPolygonDomain& D, int max_len,
                                                    Real c_max) {
  std::map<std::pair<Real, Real>, CuspPoint> seen;
  const Real snap = Real(1e-20);
  enumerate_elements(D, max_len, [&](const Word&, const MoebiusMap& g) {
    Real a = g.a, c = g.c;
    if (c < 0) a = -a, c = -c;
    if (c <= snap * (1 + abs(a)) || c > c_max * (1 + snap)) return;
    // Key on the point and on c, rounded well above accumulated error.
    auto key = std::make_pair(round(a / c * Real(1e18)), round(c * Real(1e18)));
    seen.emplace(key, CuspPoint{a, c});
  });
  std::vector<CuspPoint> out;
  out.reserve(seen.size());
  for (auto& kv : seen) out.push_back(kv.second);
  return out;
}

struct OracleResult {
  Real value = 0;
  CuspPoint best;
  long candidates = 0;
};

/// max 1 / (c^2 |alpha - a/c|) over the enumerated cusp points: a lower
/// bound for sup, not for the limsup, since early approximants are included.
inline OracleResult diophantine_lambda_oracle(const std::vector<CuspPoint>& pts, const Real& alpha,
                                              Real reject = Real(1e-25)) {
  OracleResult out;
  out.candidates = (long)pts.size();
  for (auto& p : pts) {
    Real gap = abs(alpha - p.x());
    if (gap <= reject * (1 + abs(alpha)))
      throw Error(ErrorCode::PreconditionFailed, "alpha is a cusp point g.oo");
    Real v = 1 / (p.c * p.c * gap);
    if (v > out.value) out.value = v, out.best = p;
  }
  return out;
}

inline OracleResult diophantine_lambda_oracle(const IdealPolygonDomain& D, const Real& alpha,
                                              int word_len_max, Real c_max) {
  return diophantine_lambda_oracle(enumerate_cusp_points(D, word_len_max, c_max), alpha);
}

/// Markoff-form companion for a closed geodesic gamma(beta, alpha):
/// 2 height(g^-1 gamma) = |alpha - beta| / (c^2 |alpha - a/c| |beta - a/c|).
/// Every term is a lower bound for 2 height_G(gamma) (the sup of heights over
/// images of a periodic geodesic is attained in one period), and it matches
/// 1/(c^2 |alpha - a/c|) as a/c -> alpha.
inline OracleResult markoff_form_oracle(const std::vector<CuspPoint>& pts, const Real& alpha,
                                        const Real& beta, Real reject = Real(1e-25)) {
  OracleResult out;
  out.candidates = (long)pts.size();
  const Real span = abs(alpha - beta);
  for (auto& p : pts) {
    Real ga = abs(alpha - p.x()), gb = abs(beta - p.x());
    if (ga <= reject * (1 + abs(alpha)) || gb <= reject * (1 + abs(beta)))
      throw Error(ErrorCode::PreconditionFailed, "endpoint is a cusp point g.oo");
    Real v = span / (p.c * p.c * ga * gb);
    if (v > out.value) out.value = v, out.best = p;
  }
  return out;
}

}  // namespace cusp
