#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cusp/cantor.hpp"
#include "cusp/errors.hpp"

namespace cusp {

/// S on a rectangle, with a caller-certified bound lip_G >= Lip(S - S_0),
/// S_0(x1, x2) = x1 + x2. The Lipschitz constant is taken coordinatewise,
/// as in the monotone-corner argument.
struct TargetFunction {
  std::function<Real(const Real&, const Real&)> eval;
  Real lip_G = 0;
  std::string name = "S";

  static TargetFunction sum() {
    return {[](const Real& a, const Real& b) { return a + b; }, Real(0), "S0"};
  }
  Real operator()(const Real& a, const Real& b) const { return eval(a, b); }
};

/// (1 - Lip)/(1 + Lip) > 1 - eps.
inline bool verify_lip_condition(const TargetFunction& S, Real eps) {
  if (!(eps > 0 && eps < 1)) throw Error(ErrorCode::PreconditionFailed, "eps must lie in (0, 1)");
  if (S.lip_G < 0) return false;
  return (1 - S.lip_G) / (1 + S.lip_G) > 1 - eps;
}

/// Finite-difference lower estimate of Lip(S - S_0) on a grid x grid lattice
/// of X x Y. Only a sanity check: sampled constants never certify.
inline Real sampled_lip(const TargetFunction& S, const Interval& X, const Interval& Y,
                        int grid = 64) {
  Real best = 0;
  auto G = [&](const Real& a, const Real& b) { return S(a, b) - a - b; };
  Real hx = X.length() / grid, hy = Y.length() / grid;
  for (int i = 0; i <= grid; ++i)
    for (int j = 0; j <= grid; ++j) {
      Real a = X.lo + hx * i, b = Y.lo + hy * j;
      Real g = G(a, b);
      if (i < grid && hx > 0) best = std::max(best, abs(G(a + hx, b) - g) / hx);
      if (j < grid && hy > 0) best = std::max(best, abs(G(a, b + hy) - g) / hy);
    }
  return best;
}

struct TraceStep {
  char which = 'K';     // set whose hole was removed
  bool left = true;     // kept piece
  Interval K, F;        // pair after the step
  Real hole = 0;        // |B_i| or |C_i| of the split set
  Real other_hole = 0;  // pending hole of the other set (0 if none)
  bool balanced = true; // |B_i| < (1-eps)|F_i| and |C_i| < (1-eps)|K_i| before the step
  Real inf = 0, sup = 0;  // S at the lower-left and upper-right corners after the step
  Real residual = 0;      // |S(midpoints) - x| after the step
};

struct DecompositionTrace {
  Real target = 0;
  Real eps = 0;
  Interval K0, F0;
  std::vector<TraceStep> steps;
};

struct Decomposition {
  Real k = 0, f = 0;  // midpoints of the final intervals
  Real value = 0;     // S(k, f)
  Real residual = 0;  // |S(k, f) - x|
  Interval K, F;      // final intervals, each of length < tol
  DecompositionTrace trace;
};

struct SolverPreconditions {
  std::optional<StableGapReport> gap_K, gap_F;
  std::optional<SizeReport> size;
  bool lip = false;
};

/// Nested-interval solver: at every step the set with the larger pending
/// hole is split, and the side is chosen by the corner bounds
/// inf S(K^L x F) = S(K.lo, F.lo), sup S(K^L x F) = S(B.lo, F.hi).
class StableHallSolver {
 public:
  /// With check = true the stable gap (over `budget` monotone holes), size
  /// and Lipschitz conditions are verified; failures raise PreconditionFailed.
  StableHallSolver(CantorSourcePtr K, CantorSourcePtr F, TargetFunction S, Real eps,
                   long budget = 2000, bool check = true)
      : K_(std::move(K)), F_(std::move(F)), S_(std::move(S)), eps_(eps) {
    if (!(eps > 0 && eps < 1)) throw Error(ErrorCode::PreconditionFailed, "eps must lie in (0, 1)");
    pre_.lip = verify_lip_condition(S_, eps_);
    if (!check) return;
    if (!pre_.lip)
      throw Error(ErrorCode::PreconditionFailed,
                  "Lipschitz condition: (1-Lip)/(1+Lip) <= 1-eps for Lip = " +
                      to_decimal(S_.lip_G, 8));
    pre_.gap_K = check_stable_gap(K_, eps_, budget);
    if (!pre_.gap_K->pass)
      throw Error(ErrorCode::PreconditionFailed,
                  "stable gap fails for the first set (ratio " +
                      to_decimal(pre_.gap_K->worst_ratio, 8) + ")");
    pre_.gap_F = check_stable_gap(F_, eps_, budget);
    if (!pre_.gap_F->pass)
      throw Error(ErrorCode::PreconditionFailed,
                  "stable gap fails for the second set (ratio " +
                      to_decimal(pre_.gap_F->worst_ratio, 8) + ")");
    pre_.size = check_size_condition(K_, F_, eps_);
    if (!pre_.size->pass)
      throw Error(ErrorCode::PreconditionFailed, "size condition fails");
  }

  const SolverPreconditions& preconditions() const { return pre_; }
  const TargetFunction& target() const { return S_; }
  Interval hull_K() const { return K_->root().hull; }
  Interval hull_F() const { return F_->root().hull; }

  /// S(K_0 x F_0), evaluated at the corners.
  Interval range() const {
    Interval k = hull_K(), f = hull_F();
    return {S_(k.lo, f.lo), S_(k.hi, f.hi)};
  }

  Decomposition solve(const Real& x, const Real& tol, long max_steps = 200000) const {
    if (!(tol > 0)) throw Error(ErrorCode::PreconditionFailed, "tol must be positive");
    Interval Ki = hull_K(), Fi = hull_F();
    Interval r = range();
    const Real slack = 16 * eps() * (1 + abs(r.lo) + abs(r.hi));
    if (x < r.lo - slack || x > r.hi + slack)
      throw Error(ErrorCode::TargetOutOfRange,
                  to_decimal(x, 20) + " outside [" + to_decimal(r.lo, 20) + ", " +
                      to_decimal(r.hi, 20) + "]");
    Frontier fk, ff;
    fk.add(K_->root());
    ff.add(F_->root());
    Decomposition out;
    out.trace.target = x;
    out.trace.eps = eps_;
    out.trace.K0 = Ki;
    out.trace.F0 = Fi;
    const Real floor(1e-60);
    for (long step = 0; step < max_steps; ++step) {
      if (Ki.length() < tol && Fi.length() < tol) {
        out.k = (Ki.lo + Ki.hi) / 2;
        out.f = (Fi.lo + Fi.hi) / 2;
        out.value = S_(out.k, out.f);
        out.residual = abs(out.value - x);
        out.K = Ki;
        out.F = Fi;
        if (out.residual < tol * (1 + S_.lip_G)) return out;
      }
      const HoleRecord* pb = fk.peek(*K_, floor);
      const HoleRecord* pc = ff.peek(*F_, floor);
      if (!pb && !pc)
        throw Error(ErrorCode::HoleBudgetExhausted,
                    "no holes left above the numerical floor at step " + std::to_string(step));
      Real b = pb ? pb->length() : Real(0), c = pc ? pc->length() : Real(0);
      TraceStep ts;
      ts.balanced = b < (1 - eps_) * Fi.length() && c < (1 - eps_) * Ki.length();
      if (b >= c) {
        HoleRecord B = *fk.pop(*K_, floor);
        ts.which = 'K';
        ts.hole = b;
        ts.other_hole = c;
        ts.left = x <= S_(B.gap.lo, Fi.hi);
        auto parts = std::move(fk).split(B.gap);
        fk = ts.left ? std::move(parts.first) : std::move(parts.second);
        Ki = ts.left ? Interval{Ki.lo, B.gap.lo} : Interval{B.gap.hi, Ki.hi};
      } else {
        HoleRecord C = *ff.pop(*F_, floor);
        ts.which = 'F';
        ts.hole = c;
        ts.other_hole = b;
        ts.left = x <= S_(Ki.hi, C.gap.lo);
        auto parts = std::move(ff).split(C.gap);
        ff = ts.left ? std::move(parts.first) : std::move(parts.second);
        Fi = ts.left ? Interval{Fi.lo, C.gap.lo} : Interval{C.gap.hi, Fi.hi};
      }
      ts.K = Ki;
      ts.F = Fi;
      ts.inf = S_(Ki.lo, Fi.lo);
      ts.sup = S_(Ki.hi, Fi.hi);
      ts.residual = abs(S_((Ki.lo + Ki.hi) / 2, (Fi.lo + Fi.hi) / 2) - x);
      out.trace.steps.push_back(ts);
    }
    throw Error(ErrorCode::HoleBudgetExhausted, "step limit reached");
  }

 private:
  CantorSourcePtr K_, F_;
  TargetFunction S_;
  Real eps_;
  SolverPreconditions pre_;
};

/// Re-checks a trace: nesting, balanced gap at every step, and the target
/// between the corner values of every pair.
inline bool replay_trace(const DecompositionTrace& t, std::string* why = nullptr) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  Interval K = t.K0, F = t.F0;
  const Real slack = 64 * eps() * (1 + abs(t.target));
  for (size_t i = 0; i < t.steps.size(); ++i) {
    const auto& s = t.steps[i];
    if (!(K.lo <= s.K.lo && s.K.hi <= K.hi && F.lo <= s.F.lo && s.F.hi <= F.hi))
      return fail("step " + std::to_string(i) + ": not nested");
    if (!s.balanced) return fail("step " + std::to_string(i) + ": balanced gap violated");
    if (t.target < s.inf - slack || t.target > s.sup + slack)
      return fail("step " + std::to_string(i) + ": target outside corner bounds");
    K = s.K;
    F = s.F;
  }
  return true;
}

// ---------------------------------------------------------------- heights

/// Sum mode range: K^s - K = [-(M-m) + s mu, (M-m) + s mu]; K^s + K =
/// [2m + s mu, 2M + s mu].
inline Interval sum_range(const Extrema& e, const Real& mu, long s, int sign) {
  Real w = e.M.value - e.m.value;
  if (sign < 0) return {-w + Real(s) * mu, w + Real(s) * mu};
  return {2 * e.m.value + Real(s) * mu, 2 * e.M.value + Real(s) * mu};
}

/// Requires N >= N_0 (computed by search unless given) and 2(M-m) > mu.
inline Interval sum_range(const CantorSpec& spec, long s, int sign, int n0 = -1) {
  if (n0 < 0) n0 = find_n0(spec.domain).N0;
  if (spec.N < n0)
    throw Error(ErrorCode::StableGapNotSatisfied,
                "N = " + std::to_string(spec.N) + " is below N_0 = " + std::to_string(n0));
  Extrema e = extrema(spec);
  Interval r = sum_range(e, spec.domain.mu.value, s, sign);
  if (!(r.length() > spec.domain.mu.value))
    throw Error(ErrorCode::StableGapNotSatisfied, "sum range shorter than mu");
  return r;
}

/// Height function in endpoint coordinates with certified bounds
/// lip >= Lip(H - H_0) and sup_norm >= |H - H_0|, H_0(x1, x2) = |x2 - x1|/2.
struct HeightTarget {
  std::function<Real(const Real&, const Real&)> eval;
  Real lip = 0;
  Real sup_norm = 0;
  std::string name = "H";

  static HeightTarget exact() {
    return {[](const Real& a, const Real& b) { return abs(b - a) / 2; }, Real(0), Real(0), "H0"};
  }
};

struct HeightDecomposition {
  long s = 0;
  Real x1 = 0, x2 = 0;  // points of K_N
  Real value = 0;       // s mu + x2 - x1 (sum mode) or H(x1, x2 + s mu)
  Real residual = 0;
  Decomposition raw;
};

/// Decomposes targets into pairs of points of K_N, either as
/// L = s mu + x2 - x1 or as L = H(x1, x2 + s mu).
class HeightDecomposer {
 public:
  HeightDecomposer(CantorSpec spec, Real eps = Real(0.1), int n0 = -1, long budget = 2000)
      : spec_(std::move(spec)), eps_(eps) {
    n0_ = n0 >= 0 ? n0 : find_n0(spec_.domain, eps_, budget).N0;
    if (spec_.N < n0_)
      throw Error(ErrorCode::StableGapNotSatisfied,
                  "N = " + std::to_string(spec_.N) + " is below N_0 = " + std::to_string(n0_));
    base_ = std::make_shared<BoundaryCantor>(spec_);
    ext_ = extrema(spec_);
    mu_ = spec_.domain.mu.value;
    // Translates and reflections inherit the stable gap condition, so one
    // check of K_N covers every view used below.
    gap_ = check_stable_gap(base_, eps_, budget);
    if (!gap_.pass)
      throw Error(ErrorCode::StableGapNotSatisfied, "K_N fails the stable gap check");
  }

  int n0() const { return n0_; }
  const Extrema& ext() const { return ext_; }
  const CantorSpec& spec() const { return spec_; }
  const StableGapReport& gap_report() const { return gap_; }
  CantorSourcePtr base() const { return base_; }

  Interval sum_range(long s, int sign = -1) const { return cusp::sum_range(ext_, mu_, s, sign); }

  /// Smallest s >= s_min whose range contains L.
  long choose_s(const Real& L, long s_min = 1) const {
    for (long s = s_min; s < s_min + 1000000; ++s) {
      Interval r = sum_range(s);
      if (r.lo <= L && L <= r.hi) return s;
      if (r.lo > L) break;
    }
    throw Error(ErrorCode::BelowThreshold, "no s >= " + std::to_string(s_min) + " covers L");
  }

  HeightDecomposition sum(const Real& L, const Real& tol) const {
    if (L < mu_ / 2) throw Error(ErrorCode::BelowThreshold, "L below mu/2");
    return sum(L, tol, choose_s(L));
  }

  /// Fixed s: any L in sum_range(s), including the part below mu/2.
  HeightDecomposition sum(const Real& L, const Real& tol, long s) const {
    // y1 = -x1 in -K_N, y2 = x2 + s mu in K_N^s, S = S_0.
    StableHallSolver solver(view(-1, 0), view(1, Real(s) * mu_), TargetFunction::sum(), eps_,
                            1, false);
    HeightDecomposition out;
    out.s = s;
    out.raw = solver.solve(L, tol);
    out.x1 = -out.raw.k;
    out.x2 = out.raw.f - Real(s) * mu_;
    out.value = Real(s) * mu_ + out.x2 - out.x1;
    out.residual = abs(out.value - L);
    return out;
  }

  /// Range H([m, M] x [m + s mu, M + s mu]) through the corners.
  Interval perturbed_range(const HeightTarget& H, long s) const {
    Real sm = Real(s) * mu_;
    return {H.eval(ext_.M.value, ext_.m.value + sm), H.eval(ext_.m.value, ext_.M.value + sm)};
  }

  /// The solver runs on S(y1, y2) = H(-2 y1, 2 y2) over (-K_N/2) x (K_N^s/2),
  /// so that Lip(S - S_0) = 2 Lip(H - H_0).
  TargetFunction perturbed_target(const HeightTarget& H) const {
    TargetFunction S;
    auto h = H.eval;
    S.eval = [h](const Real& y1, const Real& y2) { return h(-2 * y1, 2 * y2); };
    S.lip_G = 2 * H.lip;
    S.name = H.name;
    return S;
  }

  HeightDecomposition perturbed(const Real& L, const HeightTarget& H, const Real& tol,
                                long s_min = 1) const {
    if (!(H.sup_norm < Real(1) / 4))
      throw Error(ErrorCode::PreconditionFailed, "sup norm of H - H0 must be below 1/4");
    TargetFunction S = perturbed_target(H);
    if (!verify_lip_condition(S, eps_))
      throw Error(ErrorCode::LipConditionFailed,
                  "(1 - 2 Lip)/(1 + 2 Lip) <= 1 - eps for Lip = " + to_decimal(H.lip, 8));
    Interval first = perturbed_range(H, s_min);
    if (L < first.lo) throw Error(ErrorCode::BelowThreshold, "L below inf H(K x K^s)");
    long s = -1;
    for (long t = s_min; t < s_min + 1000000; ++t) {
      Interval r = perturbed_range(H, t);
      if (r.lo <= L && L <= r.hi) {
        s = t;
        break;
      }
      if (r.lo > L) break;
    }
    if (s < 0) throw Error(ErrorCode::TargetOutOfRange, "consecutive H-ranges do not overlap at L");
    StableHallSolver solver(view(Real(-1) / 2, 0), view(Real(1) / 2, Real(s) * mu_ / 2), S, eps_,
                            1, false);
    HeightDecomposition out;
    out.s = s;
    out.raw = solver.solve(L, tol);
    out.x1 = -2 * out.raw.k;
    out.x2 = 2 * out.raw.f - Real(s) * mu_;
    out.value = H.eval(out.x1, out.x2 + Real(s) * mu_);
    out.residual = abs(out.value - L);
    return out;
  }

 private:
  CantorSourcePtr view(Real scale, Real shift) const {
    return std::make_shared<AffineView>(base_, scale, shift);
  }

  CantorSpec spec_;
  Real eps_;
  int n0_ = -1;
  std::shared_ptr<BoundaryCantor> base_;
  Extrema ext_;
  Real mu_ = 0;
  StableGapReport gap_;
};

}  // namespace cusp
