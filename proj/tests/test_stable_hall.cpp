#include <gtest/gtest.h>

#include <random>

#include "cusp/stable_hall.hpp"

using namespace cusp;

namespace {

const IdealPolygonDomain& dom() {
  static const IdealPolygonDomain D = builtin_thrice_punctured();
  return D;
}

std::vector<Interval> level_union(const CantorSource& src, int depth) {
  std::vector<CantorNode> layer{src.root()};
  for (int d = 0; d < depth; ++d) {
    std::vector<CantorNode> next;
    for (auto& n : layer)
      for (auto& c : src.expand(n).children) next.push_back(std::move(c));
    layer = std::move(next);
  }
  std::vector<Interval> out;
  for (auto& n : layer) out.push_back(n.hull);
  std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.lo < b.lo; });
  return out;
}

// Is x in {b + a : a in A, b in B}, the sets given as sorted interval unions?
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

TargetFunction bump() {
  TargetFunction S;
  S.eval = [](const Real& a, const Real& b) { return a + b + sin(2 * a) * cos(2 * b) / 20; };
  S.lip_G = Real(1) / 10;
  S.name = "bump";
  return S;
}

}  // namespace

TEST(StableHall, LipConditionArithmetic) {
  EXPECT_TRUE(verify_lip_condition(TargetFunction::sum(), Real(0.01)));
  EXPECT_TRUE(verify_lip_condition(TargetFunction::sum(), Real(0.99)));
  TargetFunction S = TargetFunction::sum();
  S.lip_G = Real(0.5);
  EXPECT_FALSE(verify_lip_condition(S, Real(0.1)));
  S.lip_G = Real(0.02);
  EXPECT_TRUE(verify_lip_condition(S, Real(0.1)));
  EXPECT_THROW(verify_lip_condition(S, Real(0)), Error);
}

TEST(StableHall, SampledLipBelowCertificate) {
  TargetFunction S = bump();
  Real est = sampled_lip(S, {0, 1}, {0, 1});
  EXPECT_GT(est, Real(0.05));
  EXPECT_LE(est, S.lip_G);
  EXPECT_EQ(sampled_lip(TargetFunction::sum(), {0, 1}, {0, 1}), Real(0));
}

TEST(StableHall, MiddleFifthHitsTarget) {
  auto K = AffineCantor::middle(0, 1, 5), F = AffineCantor::middle(0, 1, 5);
  StableHallSolver solver(K, F, TargetFunction::sum(), Real(0.1));
  Decomposition d = solver.solve(Real(0.77), Real(1e-12));
  EXPECT_LT(abs(d.k + d.f - Real(0.77)), Real(1e-10));
  std::string why;
  EXPECT_TRUE(replay_trace(d.trace, &why)) << why;
  auto A = level_union(*K, 8);
  EXPECT_TRUE(in_minkowski_sum(A, A, Real(0.77), Real(1e-15)));
  // Points are in the surviving depth-8 intervals.
  auto inside = [&](const Real& x) {
    for (auto& I : A)
      if (I.lo <= x && x <= I.hi) return true;
    return false;
  };
  EXPECT_TRUE(inside(d.k));
  EXPECT_TRUE(inside(d.f));
}

TEST(StableHall, MinimumIsTheCorner) {
  auto K = AffineCantor::middle(0, 1, 5), F = AffineCantor::middle(2, 3, 5);
  StableHallSolver solver(K, F, TargetFunction::sum(), Real(0.1));
  Interval r = solver.range();
  EXPECT_EQ(r.lo, Real(2));
  EXPECT_EQ(r.hi, Real(4));
  Decomposition d = solver.solve(r.lo, Real(1e-12));
  EXPECT_LT(d.k, Real(1e-12));
  EXPECT_LT(d.f - 2, Real(1e-12));
  d = solver.solve(r.hi, Real(1e-12));
  EXPECT_GT(d.k, 1 - Real(1e-12));
  EXPECT_GT(d.f, 3 - Real(1e-12));
}

TEST(StableHall, RejectsOutOfRange) {
  auto K = AffineCantor::middle(0, 1, 5);
  StableHallSolver solver(K, K, TargetFunction::sum(), Real(0.1));
  EXPECT_THROW(solver.solve(Real(2.01), Real(1e-10)), Error);
  try {
    solver.solve(Real(-0.5), Real(1e-10));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TargetOutOfRange);
  }
}

TEST(StableHall, MiddleThirdsRejectedAtPrecondition) {
  auto K = AffineCantor::middle(0, 1, 3);
  for (double e : {0.05, 0.1, 0.3}) {
    try {
      StableHallSolver solver(K, K, TargetFunction::sum(), Real(e));
      ADD_FAILURE() << "accepted at eps " << e;
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::PreconditionFailed);
    }
  }
}

TEST(StableHall, LipFailureIsAPrecondition) {
  auto K = AffineCantor::middle(0, 1, 5);
  TargetFunction S = bump();
  EXPECT_THROW(StableHallSolver(K, K, S, Real(0.1)), Error);
  EXPECT_NO_THROW(StableHallSolver(K, K, S, Real(0.3)));
}

TEST(StableHall, PerturbedHundredTargets) {
  auto K = AffineCantor::middle(0, 1, 5), F = AffineCantor::middle(0, 1, 5);
  StableHallSolver solver(K, F, bump(), Real(0.3));
  Interval r = solver.range();
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    Real x = r.lo + r.length() * Real(u(rng));
    Decomposition d = solver.solve(x, Real(1e-11));
    ASSERT_LE(d.residual, Real(1e-8)) << i;
    std::string why;
    ASSERT_TRUE(replay_trace(d.trace, &why)) << why;
  }
}

TEST(StableHall, TraceAlwaysSplitsTheLargerHole) {
  auto K = AffineCantor::middle(0, 1, 5), F = AffineCantor::middle(0, 2, 7);
  StableHallSolver solver(K, F, TargetFunction::sum(), Real(0.2), 2000, false);
  Decomposition d = solver.solve(Real(1.3), Real(1e-9));
  ASSERT_FALSE(d.trace.steps.empty());
  for (auto& s : d.trace.steps) EXPECT_GE(s.hole, s.other_hole);
}

TEST(StableHall, SumRangeBuiltin) {
  CantorSpec spec(dom(), 3);
  Extrema e = extrema(spec);
  Real w = e.M.value - e.m.value;
  for (long s : {1L, 2L, 5L}) {
    Interval r = sum_range(spec, s, -1, 3);
    EXPECT_EQ(r.lo, -w + 4 * s);
    EXPECT_EQ(r.hi, w + 4 * s);
    EXPECT_GT(r.length(), Real(4));
    Interval p = sum_range(spec, s, +1, 3);
    EXPECT_LT(abs(p.lo - (r.lo + e.m.value + e.M.value)), Real(1e-30));
    EXPECT_LT(abs(p.hi - (r.hi + e.m.value + e.M.value)), Real(1e-30));
    // Overlap with the next range, so the ray [mu/2, inf) is covered.
    EXPECT_LE(sum_range(spec, s + 1, -1, 3).lo, r.hi);
  }
  EXPECT_LE(sum_range(spec, 1, -1, 3).lo, Real(2));
  try {
    sum_range(CantorSpec(dom(), 2), 1, -1, 3);
    ADD_FAILURE();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::StableGapNotSatisfied);
  }
}

TEST(StableHall, HeightSumMode) {
  HeightDecomposer hd(CantorSpec(dom(), 3), Real(0.1), 3);
  HeightDecomposition d = hd.sum(Real(7.3), Real(1e-12));
  EXPECT_TRUE(d.s == 1 || d.s == 2);
  EXPECT_LT(abs(d.x2 - d.x1 - (Real(7.3) - 4 * d.s)), Real(1e-10));
  EXPECT_LE(hd.ext().m.value - Real(1e-20), std::min(d.x1, d.x2));
  EXPECT_GE(hd.ext().M.value + Real(1e-20), std::max(d.x1, d.x2));

  HeightDecomposition lo = hd.sum(Real(2), Real(1e-12));
  EXPECT_EQ(lo.s, 1);
  EXPECT_LT(lo.residual, Real(1e-10));
  EXPECT_THROW(hd.sum(Real(1.99), Real(1e-10)), Error);
}

TEST(StableHall, HeightPointsExpandInsideTheCantorSet) {
  CantorSpec spec(dom(), 3);
  HeightDecomposer hd(spec, Real(0.1), 3);
  HeightDecomposition d = hd.sum(Real(11.1), Real(1e-14));
  // Expansions of x1, x2 avoid cuspidal windows of length N+1 as far as
  // the interval width resolves them.
  for (Real x : {d.x1, d.x2}) {
    Word w = expand(dom(), cayley(ExtendedReal(x)), 12);
    ASSERT_EQ(w.size(), 12u);
    EXPECT_FALSE(dom().is_eta(w[0]));
    for (size_t i = 0; i + 4 <= w.size(); ++i)
      EXPECT_EQ(is_cuspidal(dom(), Word(w.begin() + i, w.begin() + i + 4)), CuspKind::no)
          << word_to_string(dom(), w);
  }
}

TEST(StableHall, PerturbedIdentityMatchesSumMode) {
  HeightDecomposer hd(CantorSpec(dom(), 3), Real(0.1), 3);
  for (Real L : {Real(2.5), Real(7.3), Real(13.9)}) {
    HeightDecomposition a = hd.sum(L, Real(1e-12));
    HeightDecomposition b = hd.perturbed(L / 2, HeightTarget::exact(), Real(1e-12) / 2);
    EXPECT_EQ(a.s, b.s);
    EXPECT_LT(abs(a.x1 - b.x1), Real(1e-10));
    EXPECT_LT(abs(a.x2 - b.x2), Real(1e-10));
    EXPECT_LT(b.residual, Real(1e-11));
  }
}

TEST(StableHall, PerturbedHeightGuards) {
  HeightDecomposer hd(CantorSpec(dom(), 3), Real(0.1), 3);
  HeightTarget H = HeightTarget::exact();
  H.sup_norm = Real(0.3);
  EXPECT_THROW(hd.perturbed(Real(4), H, Real(1e-10)), Error);
  H.sup_norm = 0;
  H.lip = Real(0.2);
  try {
    hd.perturbed(Real(4), H, Real(1e-10));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LipConditionFailed);
  }
  H.lip = 0;
  try {
    hd.perturbed(Real(0.1), H, Real(1e-10));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BelowThreshold);
  }
}

TEST(StableHall, SumCoverageAgainstMinkowskiDifference) {
  CantorSpec spec(dom(), 3);
  HeightDecomposer hd(spec, Real(0.1), 3);
  CantorApproximation a = build_approximation(spec, 6);
  std::vector<Interval> A, negA;
  for (auto& i : a.intervals) {
    A.push_back(i.interval);
    negA.push_back({-i.interval.hi, -i.interval.lo});
  }
  std::sort(negA.begin(), negA.end(), [](auto& p, auto& q) { return p.lo < q.lo; });
  Interval r = hd.sum_range(1);
  for (int i = 0; i <= 100; ++i) {
    Real L = r.lo + r.length() * i / 100;
    HeightDecomposition d = hd.sum(L, Real(1e-11), 1);
    ASSERT_LE(d.residual, Real(1e-8)) << i;
    std::string why;
    ASSERT_TRUE(replay_trace(d.raw.trace, &why)) << why;
    EXPECT_TRUE(in_minkowski_sum(negA, A, L - 4 * d.s, Real(1e-14))) << i;
  }
}
