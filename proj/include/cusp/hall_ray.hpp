#pragma once

#include <map>
#include <string>
#include <vector>

#include "cusp/cantor.hpp"
#include "cusp/cuspidal.hpp"
#include "cusp/perron.hpp"
#include "cusp/stable_hall.hpp"

namespace cusp {

// ---------------------------------------------------------------- streams into K_N

/// Eventually periodic B_N stream whose point x' approximates x. Letters are
/// read off nested arcs while x is at least `margin` inside the arc of an
/// allowed successor; afterwards the stream follows clockwise-first
/// successors until the automaton cycles.
struct CantorStream {
  LetterStream stream = LetterStream::explicit_word({});
  Word prefix;      // letters determined by x
  Real point = 0;   // x'
  Real err = 0;     // |x' - x|
};

inline CantorStream cantor_stream(const IdealPolygonDomain& D, int N, const Real& x,
                                  Real margin = Real(1e-30), int max_depth = 400) {
  CuspAutomaton aut(D, N);
  MoebiusMap G;
  std::vector<int> path;
  auto inside = [&](const MoebiusMap& g, Letter b, Real& slack) {
    Real lo, hi;
    if (!finite_interval(image_arc(D, g, b), lo, hi)) return false;
    slack = std::min(x - lo, hi - x);
    return slack >= margin;
  };
  std::vector<int> cand;
  for (Letter b : D.letters())
    if (!D.is_eta(b)) cand.push_back(aut.id({b.id(), 1, 1}));
  for (int n = 0; n < max_depth; ++n) {
    int pick = -1;
    Real slack;
    for (int c : cand)
      if (inside(G, aut.letter(c), slack)) {
        pick = c;
        break;
      }
    if (pick < 0) break;
    path.push_back(pick);
    G = compose(G, D.g(aut.letter(pick)));
    cand = aut.successors(pick);
  }
  if (path.empty()) throw Error(ErrorCode::PreconditionFailed, "point is not near K_N");
  CantorStream out;
  for (int s : path) out.prefix.push_back(aut.letter(s));
  // Continue clockwise-first until a state repeats.
  std::map<int, size_t> seen;
  std::vector<int> tail;
  int cur = aut.successors(path.back()).front();
  while (!seen.count(cur)) {
    seen[cur] = tail.size();
    tail.push_back(cur);
    cur = aut.successors(cur).front();
  }
  size_t k = seen[cur];
  Word pre = out.prefix, cyc;
  MoebiusMap P = G, H;
  for (size_t i = 0; i < k; ++i) {
    pre.push_back(aut.letter(tail[i]));
    P = compose(P, D.g(aut.letter(tail[i])));
  }
  for (size_t i = k; i < tail.size(); ++i) {
    cyc.push_back(aut.letter(tail[i]));
    H = compose(H, D.g(aut.letter(tail[i])));
  }
  ExtendedReal xp = apply(P, attracting_fixed_point(H));
  if (xp.is_inf()) throw Error(ErrorCode::PoleProximity, "continuation reaches infinity");
  out.stream = LetterStream::periodic(pre, cyc);
  out.point = xp.value();
  out.err = abs(out.point - x) + xp.err();
  return out;
}

// ---------------------------------------------------------------- threshold

struct HallThreshold {
  int N0 = 0;
  RealScalar value;  // (N0 + 1) mu; targets must exceed it strictly
  N0Result search;
};

inline HallThreshold hall_threshold(const IdealPolygonDomain& D, Real eps = Real(0.1),
                                    long budget = 2000) {
  HallThreshold t;
  t.search = find_n0(D, eps, budget);
  t.N0 = t.search.N0;
  t.value = RealScalar(Real(t.N0 + 1) * D.mu.value, Real(t.N0 + 1) * D.mu.err);
  return t;
}

// ---------------------------------------------------------------- witness words

/// Two letters joining `left` (ending in a_j) to `right` (starting with
/// bar b_{j+1}). First choice: the lowest delta with a_j delta not cuspidal,
/// then the lowest delta' != bar delta, b_{j+1} with delta' bar b_{j+1} not
/// cuspidal. With 2d = 4 letters that rule can be unsatisfiable; the fallback
/// is the lexicographically lowest admissible pair that creates no cuspidal
/// factor of N+1 letters across the junction.
inline std::pair<Letter, Letter> choose_bridge(const IdealPolygonDomain& D, int N,
                                               const Word& left, const Word& right,
                                               bool* fallback = nullptr) {
  if (fallback) *fallback = false;
  const Letter aj = left.back(), bn = right.front().inv();
  std::optional<Letter> d1, d2;
  for (Letter c : D.letters())
    if (c != aj.inv() && is_cuspidal(D, {aj, c}) == CuspKind::no) {
      d1 = c;
      break;
    }
  if (d1)
    for (Letter c : D.letters())
      if (c != d1->inv() && c != bn && is_cuspidal(D, {c, bn.inv()}) == CuspKind::no) {
        d2 = c;
        break;
      }
  if (d1 && d2) return {*d1, *d2};
  if (fallback) *fallback = true;
  const long k = (long)left.size();
  for (Letter x : D.letters())
    for (Letter y : D.letters()) {
      Word u = left;
      u.push_back(x);
      u.push_back(y);
      u.insert(u.end(), right.begin(), right.end());
      if (!admissible(u)) continue;
      bool ok = true;
      // Factors of N+1 letters containing a bridge letter (positions k, k+1).
      for (long i = std::max(0L, k - N); ok && i <= k + 1 && i + N + 1 <= (long)u.size(); ++i)
        if (is_cuspidal(D, Word(u.begin() + i, u.begin() + i + N + 1)) != CuspKind::no) ok = false;
      if (ok) return {x, y};
    }
  throw Error(ErrorCode::PreconditionFailed, "no bridge letters satisfy the constraints");
}

/// c_n = ... W_{-1} d_{-1} d'_{-1} W_0 d_0 d'_0 W_1 ..., with
/// W_j = bar b_|j| ... bar b_0 eta^s a_0 ... a_|j| and W_0 starting at n = 0.
struct WitnessSpec {
  Real target_L = 0;
  Real realized_L = 0;  // s mu + x2' - x1' for the streams actually used
  int N = 0;
  long s = 0;
  Real x1 = 0, x2 = 0;  // solver output
  CantorStream a, b;    // a: x2, b: x1
  std::map<long, std::pair<Letter, Letter>> overrides;  // forced interpolators

  long block_length(long j) const { return 2 * (std::abs(j) + 1) + s; }
  /// First index of W_j.
  long block_start(long j) const {
    long t = std::abs(j);
    if (j >= 0) return t * t + t * (s + 3);
    return -(t * (t + 1) + t * (s + 4));
  }
  /// Start of the central eta^s in W_k.
  long r(long k) const { return block_start(k) + std::abs(k) + 1; }

  long block_of(long n) const {
    long lo = -2000000, hi = 2000000;  // block_start is increasing
    while (hi - lo > 1) {
      long mid = lo + (hi - lo) / 2;
      (block_start(mid) <= n ? lo : hi) = mid;
    }
    return lo;
  }

  /// Bridge letters between W_j and W_{j+1}; see choose_bridge.
  std::pair<Letter, Letter> interpolators(const IdealPolygonDomain& D, long j,
                                          bool* fallback = nullptr) const {
    if (fallback) *fallback = false;
    auto it = overrides.find(j);
    if (it != overrides.end()) return it->second;
    // N letters of context on each side, all inside W_j and W_{j+1}.
    Word left, right;
    const long end = block_start(j) + block_length(j);
    for (long n = end - N; n < end; ++n) left.push_back(block_letter(D, n));
    for (long n = end + 2; n < end + 2 + N; ++n) right.push_back(block_letter(D, n));
    return choose_bridge(D, N, left, right, fallback);
  }

  /// Letter of W_j at absolute index n (n must not be a bridge position).
  Letter block_letter(const IdealPolygonDomain& D, long n) const {
    long j = block_of(n);
    long i = n - block_start(j), t = std::abs(j);
    if (i <= t) return b.stream.at(D, t - i).inv();
    if (i < t + 1 + s) return D.eta;
    if (i < block_length(j)) return a.stream.at(D, i - t - 1 - s);
    throw Error(ErrorCode::PreconditionFailed, "bridge position");
  }

  Letter letter(const IdealPolygonDomain& D, long n) const {
    long j = block_of(n);
    long i = n - block_start(j);
    if (i < block_length(j)) return block_letter(D, n);
    auto d = interpolators(D, j);
    return i == block_length(j) ? d.first : d.second;
  }

  BiInfiniteWordSpec bi_word(const IdealPolygonDomain& D) const {
    const WitnessSpec self = *this;
    const IdealPolygonDomain* dp = &D;
    return {LetterStream::generator([self, dp](long i) { return self.letter(*dp, -1 - i); }),
            LetterStream::generator([self, dp](long i) { return self.letter(*dp, i); })};
  }

  Word window(const IdealPolygonDomain& D, long lo, long hi) const {
    Word w;
    for (long n = lo; n < hi; ++n) w.push_back(letter(D, n));
    return w;
  }
};

struct WitnessOptions {
  Real eps = Real(0.1);
  long budget = 2000;
  Real solver_tol = Real(1e-14);
  int n0 = -1;  // computed when negative
};

/// Words W_j around streams for x2 = [a_0, ...] and x1 = [b_0, ...].
inline WitnessSpec assemble_witness(const IdealPolygonDomain& D, int N, long s, const Real& x1,
                                    const Real& x2, const Real& L) {
  WitnessSpec w;
  w.target_L = L;
  w.N = N;
  w.s = s;
  w.x1 = x1;
  w.x2 = x2;
  w.a = cantor_stream(D, N, x2);
  w.b = cantor_stream(D, N, x1);
  w.realized_L = Real(s) * D.mu.value + w.a.point - w.b.point;
  return w;
}

/// Hall ray witness: L = s mu + x2 - x1 with x1, x2 in K_{N0}, then W_j blocks.
inline WitnessSpec build_witness(const IdealPolygonDomain& D, const Real& L,
                                 const WitnessOptions& opt = {}) {
  int n0 = opt.n0 >= 0 ? opt.n0 : find_n0(D, opt.eps, opt.budget).N0;
  Real thr = Real(n0 + 1) * D.mu.value;
  if (!(L > thr))
    throw Error(ErrorCode::BelowThreshold,
                "L = " + to_decimal(L, 12) + " does not exceed (N0+1) mu = " + to_decimal(thr, 12));
  HeightDecomposer hd(CantorSpec(D, n0), opt.eps, n0, opt.budget);
  HeightDecomposition d = hd.sum(L, opt.solver_tol);
  return assemble_witness(D, n0, d.s, d.x1, d.x2, L);
}

// ---------------------------------------------------------------- verification

enum class StepCase { central, i, ii, iii, iv };

inline const char* step_case_name(StepCase c) {
  switch (c) {
    case StepCase::central: return "central";
    case StepCase::i: return "i";
    case StepCase::ii: return "ii";
    case StepCase::iii: return "iii";
    case StepCase::iv: return "iv";
  }
  return "";
}

struct SubsequenceValue {
  long k = 0;
  long r = 0;
  RealScalar value;  // 2 * window at r_k
};

struct WitnessReport {
  std::vector<SubsequenceValue> subsequence_values;
  RealScalar off_subsequence_max;
  long off_argmax = 0;
  std::map<std::string, long> case_counts;
  long windows = 0;
  Real margin = 0;           // L - (N + 1) mu
  Real stream_err = 0;       // |realized_L - target_L|
  Real final_deviation = 0;  // max over |k| = k_blocks of |value - L|
  Real central_spread = 0;   // max variation inside a central run
  bool admissible = true;
  bool cuspidal_bounded = true;  // no cuspidal factor of N+1 letters off the central runs
  bool case_bounds = true;
  long bridges = 0, fallback_bridges = 0;
  std::vector<std::string> failures;
  bool pass = false;
};

/// Evaluates 2 * window at every j in [r_{-k}, r_k + s] and checks the
/// off-run window bounds by case.
inline WitnessReport verify_witness(const IdealPolygonDomain& D, const WitnessSpec& w,
                                    int k_blocks, Real tol = Real(1e-6)) {
  if (k_blocks < 3) throw Error(ErrorCode::PreconditionFailed, "k_blocks must be at least 3");
  WitnessReport R;
  const Real mu = D.mu.value, L = w.target_L;
  R.margin = L - Real(w.N + 1) * mu;
  R.stream_err = abs(w.realized_L - L);
  const long lo = w.r(-k_blocks), hi = w.r(k_blocks) + w.s;
  // One letter of context on each side for the factor checks.
  Word c = w.window(D, lo - w.N - 2, hi + w.N + 3);
  auto at = [&](long n) { return c[n - (lo - w.N - 2)]; };
  R.admissible = admissible(c);
  if (!R.admissible) R.failures.push_back("word backtracks");
  auto central = [&](long j, long& k) {
    long blk = w.block_of(j);
    k = blk;
    return j >= w.r(blk) && j <= w.r(blk) + w.s;
  };
  for (long n = lo; n + w.N + 1 <= hi; ++n) {
    Word f(c.begin() + (n - (lo - w.N - 2)), c.begin() + (n - (lo - w.N - 2)) + w.N + 1);
    if (is_cuspidal(D, f) == CuspKind::no) continue;
    long k;
    bool in_run = central(n, k) && n + w.N + 1 <= w.r(k) + w.s;
    if (!in_run) {
      R.cuspidal_bounded = false;
      R.failures.push_back("cuspidal factor of length N+1 at " + std::to_string(n));
      break;
    }
  }
  for (long j = -k_blocks - 1; j <= k_blocks; ++j) {
    bool fb;
    w.interpolators(D, j, &fb);
    ++R.bridges;
    R.fallback_bridges += fb;
  }
  BiInfiniteWordSpec bw = w.bi_word(D);
  std::map<long, RealScalar> vals;
  auto value = [&](long j) -> RealScalar {
    auto it = vals.find(j);
    if (it != vals.end()) return it->second;
    WindowValue v = window_value(D, bw, j);
    RealScalar r(2 * v.value.value, 2 * v.value.err);
    vals[j] = r;
    return r;
  };
  Real offmax = -1, offerr = 0;
  for (long j = lo; j <= hi; ++j) {
    RealScalar v = value(j);
    ++R.windows;
    long k;
    const bool eta_j = D.is_eta(at(j)), eta_p = D.is_eta(at(j - 1));
    StepCase sc;
    if (central(j, k)) {
      sc = StepCase::central;
      if (j == w.r(k)) R.subsequence_values.push_back({k, j, v});
      R.central_spread = std::max(R.central_spread, abs(v.value - value(w.r(k)).value));
    } else if (!eta_j && !eta_p) {
      sc = StepCase::i;
      if (v.value > mu + v.err) R.case_bounds = false;
    } else if (eta_j && !eta_p) {
      sc = StepCase::ii;
      if (v.value > Real(w.N + 1) * mu + v.err) R.case_bounds = false;
    } else if (!eta_j && eta_p) {
      sc = StepCase::iii;
      if (v.value > Real(w.N + 1) * mu + v.err) R.case_bounds = false;
    } else {
      sc = StepCase::iv;
      long m = j;
      while (D.is_eta(at(m - 1)) && m - 1 > lo - w.N - 2) --m;
      RealScalar vm = value(m);
      if (abs(vm.value - v.value) > vm.err + v.err + 64 * eps() * v.value) R.case_bounds = false;
    }
    ++R.case_counts[step_case_name(sc)];
    if (sc != StepCase::central && v.value > offmax) {
      offmax = v.value;
      offerr = v.err;
      R.off_argmax = j;
    }
  }
  if (!R.case_bounds) R.failures.push_back("off-run case bound violated");
  R.off_subsequence_max = RealScalar(offmax, offerr);
  for (auto& sv : R.subsequence_values)
    if (std::abs(sv.k) == k_blocks)
      R.final_deviation = std::max(R.final_deviation, abs(sv.value.value - L));
  Real allow = tol + R.stream_err;
  for (auto& sv : R.subsequence_values)
    if (std::abs(sv.k) == k_blocks) allow = std::max(allow, tol + R.stream_err + sv.value.err);
  if (R.final_deviation > allow) R.failures.push_back("subsequence values miss the target");
  if (offmax > L + tol + offerr) R.failures.push_back("off-subsequence window exceeds L");
  if (R.margin <= 0) R.failures.push_back("target not above (N+1) mu");
  R.pass = R.failures.empty();
  return R;
}

}  // namespace cusp
