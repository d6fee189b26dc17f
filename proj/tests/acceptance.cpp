// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "cusp/domain_io.hpp"
#include "cusp/proper_height.hpp"

using namespace cusp;

namespace {

const IdealPolygonDomain& dom() {
  static const IdealPolygonDomain D = builtin_thrice_punctured();
  return D;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const Real& x, int digits = 3) { return to_decimal(x, digits); }

// Random period of length len, admissible cyclically, with a hyperbolic element.
Word random_period(std::mt19937_64& rng, int len) {
  std::uniform_int_distribution<int> pick(0, dom().size() - 1);
  while (true) {
    Word w;
    for (int i = 0; i < len; ++i) w.push_back(Letter::from_id(pick(rng)));
    Word cyc = w;
    cyc.insert(cyc.end(), w.begin(), w.end());
    if (!admissible(cyc)) continue;
    if (abs(word_map(dom(), w).trace()) > 2 + Real(1e-6)) return w;
  }
}

// Longest cuspidal factor of the periodic word, capped at cap letters.
int max_cuspidal_factor(const Word& period, int cap) {
  Word cyc;
  while ((int)cyc.size() < (int)period.size() + cap + 1)
    cyc.insert(cyc.end(), period.begin(), period.end());
  int best = 0;
  for (size_t i = 0; i < period.size(); ++i)
    for (int n = 1; n <= cap && i + n <= cyc.size(); ++n)
      if (is_cuspidal(dom(), Word(cyc.begin() + i, cyc.begin() + i + n)) != CuspKind::no)
        best = std::max(best, n);
  return best;
}

// ---------------------------------------------------------------- 1

Outcome criterion1() {
  auto run = [](const std::string& period) {
    std::string cmd = std::string(CUSP_RAY) + " perron cf --period " + period;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) throw std::runtime_error("cannot run " + cmd);
    std::string out;
    char buf[4096];
    while (size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
    if (pclose(p) != 0) throw std::runtime_error(cmd + " exited with an error");
    auto j = nlohmann::ordered_json::parse(out);
    return Real(j["result"]["lagrange"]["value"].get<std::string>().c_str());
  };
  Real a = run("1"), b = run("2");
  Real da = abs(a - sqrt(Real(5))), db = abs(b - 2 * sqrt(Real(2)));
  return {da <= Real(1e-9) && db <= Real(1e-9),
          "|cf(1) - sqrt5| = " + fmt(da) + ", |cf(2) - 2 sqrt2| = " + fmt(db)};
}

// ---------------------------------------------------------------- 2

Outcome criterion2() {
  ValidationReport n = validate(dom());
  Real worst = 0;
  for (auto& c : n.conditions) worst = std::max(worst, c.residual);
  bool ok_n = n.pass && worst < Real(1e-10) && n.notes.empty();

  ValidationReport r = validate(builtin_thrice_punctured(true));
  bool note = false;
  for (auto& s : r.notes) note |= s.find("normalization") != std::string::npos;
  bool ok_r = r.pass && note;
  return {ok_n && ok_r, "normalized: " + std::to_string(n.conditions.size()) +
                            " conditions, max residual " + fmt(worst) +
                            "; raw: pass=" + (r.pass ? "yes" : "no") +
                            ", normalization note=" + (note ? "yes" : "no")};
}

// ---------------------------------------------------------------- 3

Outcome criterion3() {
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<int> len(2, 8);
  int mismatches = 0;
  Real worst = 0;
  for (int i = 0; i < 1000; ++i) {
    LetterStream s = LetterStream::periodic({}, random_period(rng, len(rng)));
    PointEstimate p = point_of_stream(dom(), s, 60);
    worst = std::max(worst, p.err.value);
    if (expand(dom(), p.point, 40) != s.prefix(dom(), 40)) ++mismatches;
  }
  return {mismatches == 0 && worst < Real(1e-9),
          "1000 streams, mismatches " + std::to_string(mismatches) + ", max point err " +
              fmt(worst)};
}

// ---------------------------------------------------------------- 4

Outcome criterion4() {
  const auto& D = dom();
  long words = 0, disagree = 0;
  std::function<void(Word&)> rec = [&](Word& w) {
    if (!w.empty()) {
      ++words;
      if (is_cuspidal(D, w) != is_cuspidal_geometric(D, w)) ++disagree;
    }
    if (w.size() == 8) return;
    for (Letter x : D.letters()) {
      if (!w.empty() && x == w.back().inv()) continue;
      w.push_back(x);
      rec(w);
      w.pop_back();
    }
  };
  Word w;
  rec(w);

  // Parabolic words and their powers up to length 8.
  long parabolic = 0, bad = 0;
  Real worst_trace = 0;
  for (const auto& r : parabolic_words(D)) {
    Word pw;
    while (pw.size() + r.word.size() <= 8) {
      pw.insert(pw.end(), r.word.begin(), r.word.end());
      ++parabolic;
      MoebiusMap g = word_map(D, pw);
      Real dt = abs(abs(g.trace()) - 2);
      worst_trace = std::max(worst_trace, dt);
      ExtendedReal fx = apply(g, r.fixed_x);
      bool fixes = r.fixed_x.is_inf() ? fx.is_inf()
                                      : !fx.is_inf() && abs(fx.value() - r.fixed_x.value()) < Real(1e-10);
      CuspKind want = r.side == Side::left ? CuspKind::left : CuspKind::right;
      if (dt > Real(1e-10) || !fixes || is_cuspidal(D, pw) == CuspKind::no ||
          (is_cuspidal(D, pw) != want && is_cuspidal(D, pw) != CuspKind::both))
        ++bad;
    }
  }
  long expected = 0;
  for (long n = 1, c = D.size(); n <= 8; ++n, c *= D.size() - 1) expected += c;
  return {disagree == 0 && bad == 0 && words == expected,
          std::to_string(words) + " words, " + std::to_string(disagree) + " disagreements; " +
              std::to_string(parabolic) + " parabolic words, " + std::to_string(bad) +
              " bad, max ||tr| - 2| " + fmt(worst_trace)};
}

// ---------------------------------------------------------------- 5

// Random subdivision of [0, 1] satisfying the eps-stable gap condition at every step.
SlowSubdivision random_stable_subdivision(std::mt19937_64& rng, Real eps, int steps) {
  std::uniform_real_distribution<double> U(0, 1);
  SlowSubdivision s;
  s.hull = {0, 1};
  std::vector<Interval> cur{s.hull};
  for (int i = 0; i < steps; ++i) {
    size_t k = rng() % cur.size();
    Interval K = cur[k];
    Real t, l, r;
    do {
      t = Real(0.02 + 0.5 * U(rng));
      l = (1 - t) * Real(0.1 + 0.8 * U(rng));
      r = 1 - t - l;
    } while (!(t < (1 - eps) * l && t < (1 - eps) * r));
    SubdivisionStep st;
    st.host = K;
    st.hole.gap = {K.lo + l * K.length(), K.lo + (l + t) * K.length()};
    st.left = {K.lo, st.hole.gap.lo};
    st.right = {st.hole.gap.hi, K.hi};
    cur.erase(cur.begin() + k);
    cur.push_back(st.left);
    cur.push_back(st.right);
    s.steps.push_back(st);
  }
  return s;
}

int g_n0 = -1;

Outcome criterion5() {
  N0Result r = find_n0(dom(), Real(0.1), 2000);
  g_n0 = r.N0;
  const N0Entry& e = r.trail.back();
  bool minimal = true;
  for (size_t i = 0; i + 1 < r.trail.size(); ++i) minimal &= !r.trail[i].pass();
  Real width = e.ext.M.value - e.ext.m.value;
  bool ok = e.pass() && minimal && e.gap.holes_examined == 2000 && width > dom().mu.value / 2;

  std::mt19937_64 rng(5005);
  const Real eps(0.1);
  int kept = 0;
  for (int k = 0; k < 50; ++k) {
    auto s = random_stable_subdivision(rng, eps, 60);
    if (!check_stable_gap(s, eps).pass) continue;
    std::vector<HoleRecord> holes;
    for (auto& st : s.steps) holes.push_back(st.hole);
    auto m = reorder_monotone(s.hull, holes);
    if (verify_slow_subdivision(m, true) && check_stable_gap(m, eps).pass) ++kept;
  }
  return {ok && kept == 50, "N0 = " + std::to_string(r.N0) + ", worst ratio " +
                                fmt(e.gap.worst_ratio) + ", M - m = " + fmt(width, 4) +
                                "; reorder kept the condition on " + std::to_string(kept) +
                                "/50"};
}

// ---------------------------------------------------------------- 6

bool in_minkowski_sum(const std::vector<Interval>& A, const std::vector<Interval>& B, Real x,
                      Real slack) {
  for (auto& I : A) {
    Real lo = x - I.hi - slack, hi = x - I.lo + slack;
    auto it = std::lower_bound(B.begin(), B.end(), lo,
                               [](const Interval& J, const Real& v) { return J.hi < v; });
    if (it != B.end() && it->lo <= hi) return true;
  }
  return false;
}

Outcome criterion6() {
  CantorSpec spec(dom(), g_n0);
  HeightDecomposer hd(spec, Real(0.1), g_n0);
  CantorApproximation a = build_approximation(spec, 8);
  std::vector<Interval> A, negA;
  for (auto& i : a.intervals) {
    A.push_back(i.interval);
    negA.push_back({-i.interval.hi, -i.interval.lo});
  }
  std::sort(A.begin(), A.end(), [](auto& p, auto& q) { return p.lo < q.lo; });
  std::sort(negA.begin(), negA.end(), [](auto& p, auto& q) { return p.lo < q.lo; });
  long fails = 0, outside = 0;
  Real worst = 0;
  for (long s : {1L, 2L, 5L}) {
    Interval r = hd.sum_range(s);
    for (int i = 0; i <= 1000; ++i) {
      Real L = r.lo + r.length() * i / 1000;
      HeightDecomposition d = hd.sum(L, Real(1e-11), s);
      worst = std::max(worst, d.residual);
      if (d.residual > Real(1e-8) || !replay_trace(d.raw.trace)) ++fails;
      if (!in_minkowski_sum(negA, A, L - dom().mu.value * s, Real(1e-14))) ++outside;
    }
  }
  return {fails == 0 && outside == 0,
          "3003 targets, max residual " + fmt(worst) + ", failed " + std::to_string(fails) +
              ", outside depth-8 difference " + std::to_string(outside)};
}

// ---------------------------------------------------------------- 7

Outcome criterion7() {
  TargetFunction S;
  S.eval = [](const Real& a, const Real& b) { return a + b + sin(2 * a) * cos(2 * b) / 20; };
  S.lip_G = Real(1) / 10;
  S.name = "bump";
  auto K = AffineCantor::middle(0, 1, 5);
  StableHallSolver solver(K, K, S, Real(0.3));
  Interval r = solver.range();
  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> u(0, 1);
  long fails = 0;
  Real worst = 0;
  for (int i = 0; i < 100; ++i) {
    Decomposition d = solver.solve(r.lo + r.length() * Real(u(rng)), Real(1e-11));
    worst = std::max(worst, d.residual);
    if (d.residual > Real(1e-8) || !replay_trace(d.trace)) ++fails;
  }
  int rejected = 0;
  auto T = AffineCantor::middle(0, 1, 3);
  for (double e : {0.05, 0.1, 0.3}) {
    try {
      StableHallSolver bad(T, T, TargetFunction::sum(), Real(e));
    } catch (const Error& err) {
      rejected += err.code() == ErrorCode::PreconditionFailed;
    }
  }
  return {fails == 0 && rejected == 3, "100 targets, max residual " + fmt(worst) +
                                           "; middle thirds rejected at " +
                                           std::to_string(rejected) + "/3 eps"};
}

// ---------------------------------------------------------------- 8

Outcome criterion8() {
  auto pts = enumerate_cusp_points(dom(), 14, Real(200));
  std::mt19937_64 rng(8008);
  std::uniform_int_distribution<int> len(3, 6);
  int n = 0, bad = 0;
  Real worst_over = -1, worst_under = 0;
  while (n < 20) {
    auto w = PeriodicBiWord::purely(random_period(rng, len(rng)));
    HeightEstimate h = essential_height(dom(), w);
    if (h.below_margulis) continue;
    ++n;
    auto g = normalized_geodesic(dom(), w.spec(), 0);
    OracleResult o =
        markoff_form_oracle(pts, g.geodesic.forward.value(), g.geodesic.backward.value());
    Real two_h = 2 * h.value.value;
    worst_over = std::max(worst_over, o.value - two_h);
    worst_under = std::max(worst_under, two_h - o.value);
    if (o.value > two_h + Real(1e-6) || two_h - o.value > Real(1e-3)) ++bad;
  }
  return {bad == 0, "20 words over " + std::to_string(pts.size()) +
                        " cusp points, max oracle - 2h " + fmt(worst_over) +
                        ", max 2h - oracle " + fmt(worst_under)};
}

// ---------------------------------------------------------------- 9

std::vector<Real> g_hall_targets;
std::vector<WitnessSpec> g_hall_witnesses;

Outcome criterion9() {
  HallThreshold t = hall_threshold(dom());
  WitnessOptions o;
  o.n0 = t.N0;
  int failed = 0;
  Real worst = 0;
  std::map<std::string, long> cases;
  for (int i = 0; i < 10; ++i) {
    Real L = t.value.value + 1 + Real(40) * i / 9;
    WitnessSpec w = build_witness(dom(), L, o);
    WitnessReport R = verify_witness(dom(), w, 20);
    bool ok = R.pass && R.off_subsequence_max.value <= L;
    for (auto& sv : R.subsequence_values) {
      if (std::labs(sv.k) != 20) continue;
      Real dev = abs(sv.value.value - L);
      worst = std::max(worst, dev);
      ok &= dev <= Real(1e-6) + sv.value.err + R.stream_err;
    }
    for (auto& kv : R.case_counts) cases[kv.first] += kv.second;
    failed += !ok;
    g_hall_targets.push_back(L);
    g_hall_witnesses.push_back(w);
  }
  bool all_cases = true;
  std::string counts;
  for (auto c : {"i", "ii", "iii", "iv"}) {
    all_cases &= cases[c] > 0;
    counts += std::string(" ") + c + "=" + std::to_string(cases[c]);
  }
  return {failed == 0 && all_cases, "threshold " + fmt(t.value.value, 4) + ", failed " +
                                        std::to_string(failed) + "/10, max |value - L| at k=20 " +
                                        fmt(worst) + ", cases" + counts};
}

// ---------------------------------------------------------------- 10

HeightFunction bump(double delta, double l0) {
  BumpParams b;
  b.delta = Real(delta);
  b.l0 = b.lo = Real(l0);
  b.hi = Real(l0 + 1);
  return HeightFunction::bump(dom(), b);
}

Outcome criterion10() {
  std::ostringstream os;
  bool ok = true;
  std::uint64_t seed = 10010;
  for (double d : {0.01, 0.03})
    for (int l : {1, 2}) {
      NormsReport R = perturbation_norms(bump(d, 1), Real(l), 10000, seed++);
      bool pass = R.sup_est <= R.sup_bound && R.lip_est <= R.lip_bound &&
                  R.lip_v_est <= R.lip_v_bound + R.slack && R.lip_w_est <= R.lip_w_bound + R.slack;
      ok &= pass;
      os << " d=" << d << ",l=" << l << ": sup " << fmt(R.sup_est) << "/" << fmt(R.sup_bound)
         << " lip " << fmt(R.lip_est) << "/" << fmt(R.lip_bound) << ";";
    }
  NormsReport Z = perturbation_norms(HeightFunction::im(dom()), 1, 10000, seed);
  bool zero = Z.sup_est == 0 && Z.lip_est == 0 && Z.lip_v_est == 0 && Z.lip_w_est == 0;
  return {ok && zero, "10^4 pairs each;" + os.str() + " Im gives zero: " + (zero ? "yes" : "no")};
}

// ---------------------------------------------------------------- 11

Outcome criterion11() {
  HeightFunction h = bump(0.01, 2);
  ProperSetup P = proper_setup(dom(), h);
  int failed = 0;
  Real worst = 0;
  for (Real extra : {Real(2.3), Real(9.7), Real(21.1)}) {
    ProperWitness W = proper_witness(dom(), h, P.threshold + extra);
    ProperReport R = verify_proper_witness(dom(), h, W, 12);
    worst = std::max(worst, R.windowed_diff);
    failed += !(R.pass && R.windowed_gap <= Real(1e-4));
  }
  // h = Im reproduces the Hall witnesses, in height units.
  ProperOptions o;
  o.n0 = g_n0;
  int mismatched = 0;
  for (size_t i = 0; i < g_hall_targets.size(); ++i) {
    ProperWitness W = proper_witness(dom(), HeightFunction::im(dom()), g_hall_targets[i] / 2, o);
    const WitnessSpec& B = g_hall_witnesses[i];
    mismatched += !(W.dec.s == B.s && W.spec.a.point == B.a.point && W.spec.b.point == B.b.point);
  }
  bool exact_ok = mismatched == 0 && g_hall_targets.size() == 10;
  return {failed == 0 && exact_ok,
          "threshold " + fmt(P.threshold, 6) + ", failed " + std::to_string(failed) +
              "/3, max windowed diff " + fmt(worst) + "; exact case mismatches " +
              std::to_string(mismatched) + "/" + std::to_string(g_hall_targets.size())};
}

// ---------------------------------------------------------------- 12

Outcome criterion12() {
  const int N = 4;
  CoreRegion region = core_region(dom(), N);
  std::mt19937_64 rng(12012);
  std::uniform_int_distribution<int> len(6, 12);
  int n = 0, failed = 0, flipped = 0, injected = 0;
  Real min_im = std::numeric_limits<Real>::infinity();
  const Letter e = dom().eta;
  while (n < 50) {
    Word p = random_period(rng, len(rng));
    if (max_cuspidal_factor(p, N + 1) > N) continue;
    ++n;
    CoreReport R = core_region_check(dom(), N, PeriodicBiWord::purely(p).spec(), 0, 12, &region);
    min_im = std::min(min_im, R.min_im);
    failed += !(R.pass && R.eps_N > 0 && R.min_im >= R.eps_N);

    // Rotate so that eta^{N+1} can sit in front, then inject it.
    for (size_t k = 0; k < p.size(); ++k) {
      Word q(p.begin() + k, p.end());
      q.insert(q.end(), p.begin(), p.begin() + k);
      if (q.front() == e.inv() || q.back() == e.inv() || q.front() == e || q.back() == e) continue;
      Word inj(N + 1, e);
      inj.insert(inj.end(), q.begin(), q.end());
      ++injected;
      try {
        core_region_check(dom(), N, PeriodicBiWord::purely(inj).spec(), 0, 12, &region);
      } catch (const IndexedError& err) {
        flipped += err.code() == ErrorCode::BlockTooLong;
      }
      break;
    }
  }
  return {failed == 0 && injected > 0 && flipped == injected,
          "eps_N " + fmt(region.eps_N) + ", min Im " + fmt(min_im) + ", failed " +
              std::to_string(failed) + "/50; eta^5 injections flipped " + std::to_string(flipped) +
              "/" + std::to_string(injected)};
}

}  // namespace

int main() {
  std::vector<std::pair<int, std::function<Outcome()>>> all = {
      {1, criterion1},  {2, criterion2},   {3, criterion3},   {4, criterion4},
      {5, criterion5},  {6, criterion6},   {7, criterion7},   {8, criterion8},
      {9, criterion9},  {10, criterion10}, {11, criterion11}, {12, criterion12}};
  int failures = 0;
  for (auto& [id, fn] : all) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
