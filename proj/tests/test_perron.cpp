#include <gtest/gtest.h>

#include <random>

#include "cusp/perron.hpp"

using namespace cusp;

namespace {

const IdealPolygonDomain& dom() {
  static const IdealPolygonDomain D = builtin_thrice_punctured();
  return D;
}

Word W(const std::string& s) { return parse_word(dom(), s); }

// Bottom-up evaluation of [0; c_0, ..., c_{n-1}].
Real truncated_cf(const std::vector<long>& c) {
  Real t = 0;
  for (size_t i = c.size(); i-- > 0;) t = 1 / (Real(c[i]) + t);
  return t;
}

Real truncated_lagrange(const std::vector<long>& period, int depth) {
  const long k = (long)period.size();
  Real best = 0;
  for (long n = 0; n < k; ++n) {
    std::vector<long> f, b;
    for (long i = 1; i <= depth; ++i) {
      f.push_back(period[(n + i) % k]);
      b.push_back(period[((n - i) % k + k) % k]);
    }
    best = std::max(best, Real(period[n]) + truncated_cf(f) + truncated_cf(b));
  }
  return best;
}

// Random cyclically admissible period of the given length.
Word random_period(std::mt19937_64& rng, int len) {
  std::uniform_int_distribution<int> pick(0, dom().size() - 1);
  while (true) {
    Word w;
    for (int i = 0; i < len; ++i) w.push_back(Letter::from_id(pick(rng)));
    Word cyc = w;
    cyc.insert(cyc.end(), w.begin(), w.end());
    if (admissible(cyc)) return w;
  }
}

}  // namespace

TEST(Perron, ClassicalAnchors) {
  EXPECT_LT(abs(classical_cf_lagrange({1}).value - sqrt(Real(5))), Real(1e-30));
  EXPECT_LT(abs(classical_cf_lagrange({2}).value - 2 * sqrt(Real(2))), Real(1e-30));
  EXPECT_LT(abs(classical_cf_lagrange({1, 2}).value - sqrt(Real(12))), Real(1e-30));
  EXPECT_THROW(classical_cf_lagrange({}), Error);
  EXPECT_THROW(classical_cf_lagrange({1, 0}), Error);
}

TEST(Perron, ClassicalAgainstTruncation) {
  for (auto p : std::vector<std::vector<long>>{{2, 2, 1, 1}, {3, 1}, {1, 1, 2}, {5, 2, 7}}) {
    Real exact = classical_cf_lagrange(p).value;
    Real t40 = truncated_lagrange(p, 40), t80 = truncated_lagrange(p, 80);
    EXPECT_LT(abs(exact - t40), Real(1e-12));
    EXPECT_LT(abs(t80 - t40), Real(1e-12));
  }
}

TEST(Perron, WindowConstantAlongEtaRun) {
  auto spec = PeriodicBiWord::purely(W("e e e b e~ b b e~ b")).spec();
  Real v0 = window_value(dom(), spec, 0).value.value;
  for (long j = 1; j <= 3; ++j)
    EXPECT_LT(abs(window_value(dom(), spec, j).value.value - v0), Real(1e-24)) << j;
}

TEST(Perron, WindowOffEtaBoundedByHalfMu) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    Word p = random_period(rng, 7);
    auto spec = PeriodicBiWord::purely(p).spec();
    for (long j = 20; j < 27; ++j) {
      if (dom().is_eta(spec.letter(dom(), j)) || dom().is_eta(spec.letter(dom(), j - 1))) continue;
      WindowValue v;
      try {
        v = window_value(dom(), spec, j);
      } catch (const Error&) {
        continue;  // parabolic period, degenerate geodesic
      }
      EXPECT_LE(v.value.value, dom().mu.value / 2 + v.value.err) << word_to_string(dom(), p);
    }
  }
}

TEST(Perron, EtaFreePeriodMatchesFixedPointGap) {
  for (std::string s : {"b b e~ e~", "b e b~ e~", "b b b e~"}) {
    Word p = W(s);
    Real h = window_value(dom(), PeriodicBiWord::purely(p).spec(), 0).value.value;
    MoebiusMap g = word_map(dom(), p);
    auto fp = fixed_points(g);
    ASSERT_EQ(fp.size(), 2u);
    Real gap = abs(fp[0].value() - fp[1].value()) / 2;
    EXPECT_LT(abs(h - gap), Real(1e-24)) << s;
  }
}

TEST(Perron, EssentialHeightStableAcrossHorizons) {
  auto w = PeriodicBiWord::purely(W("e e e e b"));
  HeightEstimate a = essential_height(dom(), w, 20), b = essential_height(dom(), w, 40);
  EXPECT_LE(abs(a.value.value - b.value.value), a.err + b.err + Real(1e-30));
  EXPECT_FALSE(a.below_margulis);
  EXPECT_LT(abs(a.value.value - 4 * sqrt(Real(5))), Real(1e-24));
  EXPECT_LT(abs(a.lagrange().value - 8 * sqrt(Real(5))), Real(1e-24));
}

TEST(Perron, DoublingAndShiftAndBarReversal) {
  std::mt19937_64 rng(11);
  int checked = 0;
  while (checked < 10) {
    Word p = random_period(rng, 6);
    HeightEstimate h;
    try {
      h = essential_height(dom(), PeriodicBiWord::purely(p));
    } catch (const Error&) {
      continue;
    }
    if (h.err > Real(1e-20)) continue;
    Word dbl = p;
    dbl.insert(dbl.end(), p.begin(), p.end());
    Word rot(p.begin() + 2, p.end());
    rot.insert(rot.end(), p.begin(), p.begin() + 2);
    Word rev = bar_reverse(p);
    for (const Word& q : {dbl, rot, rev}) {
      HeightEstimate g = essential_height(dom(), PeriodicBiWord::purely(q));
      EXPECT_LT(abs(g.value.value - h.value.value), Real(1e-22)) << word_to_string(dom(), p);
    }
    ++checked;
  }
}

// Closed geodesics on the builtin all have height >= m = 1, so the flag is
// exercised by a parabolic period, whose windows collapse to a cusp point.
TEST(Perron, BelowMargulisFlagged) {
  HeightEstimate h = essential_height(dom(), PeriodicBiWord::purely(W("b e~")));
  EXPECT_LT(h.value.value, Real(1));
  EXPECT_TRUE(h.below_margulis);
}

TEST(Perron, EventuallyPeriodicUsesTheTail) {
  PeriodicBiWord w;
  w.pre = W("b b e");
  w.period = W("e e e e b");
  w.neg_pre = W("e~");
  w.neg_period = W("b~ b~ e~");
  HeightEstimate a = essential_height(dom(), w, 40);
  HeightEstimate b = essential_height(dom(), PeriodicBiWord::purely(W("e e e e b")));
  EXPECT_LT(abs(a.value.value - b.value.value), a.err + Real(1e-20));
}

TEST(Perron, MarkoffOracleMatchesTwiceHeight) {
  auto pts = enumerate_cusp_points(dom(), 10, Real(200));
  for (std::string s : {"e e e e b", "e e b e~ e~ b~", "e e e b~ e~ b b"}) {
    auto w = PeriodicBiWord::purely(W(s));
    HeightEstimate h = essential_height(dom(), w);
    auto g = normalized_geodesic(dom(), w.spec(), 0);
    OracleResult r = markoff_form_oracle(pts, g.geodesic.forward.value(), g.geodesic.backward.value());
    EXPECT_LE(r.value, 2 * h.value.value + Real(1e-6)) << s;
    EXPECT_LE(2 * h.value.value - r.value, Real(1e-3)) << s;
  }
}

TEST(Perron, RawOracleGrowsWithCMaxAndRejectsCusps) {
  auto w = PeriodicBiWord::purely(W("e e e e b"));
  Real alpha = normalized_geodesic(dom(), w.spec(), 0).geodesic.forward.value();
  Real prev = 0;
  for (Real c : {Real(5), Real(20), Real(80)}) {
    OracleResult r = diophantine_lambda_oracle(dom(), alpha, 8, c);
    EXPECT_GE(r.value, prev);
    prev = r.value;
  }
  // An exact cusp point g.oo = a/c.
  MoebiusMap g = word_map(dom(), W("b e b"));
  EXPECT_THROW(diophantine_lambda_oracle(dom(), g.a / g.c, 6, Real(100)), Error);
}

TEST(Perron, PeriodValidation) {
  EXPECT_THROW(PeriodicBiWord::purely(W("b e b~")), Error);
  EXPECT_THROW(PeriodicBiWord::purely({}), Error);
}
