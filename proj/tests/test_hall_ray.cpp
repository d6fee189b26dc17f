#include <gtest/gtest.h>

#include "cusp/hall_ray.hpp"

using namespace cusp;

namespace {

const IdealPolygonDomain& dom() {
  static const IdealPolygonDomain D = builtin_thrice_punctured();
  return D;
}

WitnessOptions opts() {
  WitnessOptions o;
  o.n0 = 3;
  return o;
}

const WitnessSpec& witness25() {
  static const WitnessSpec w = build_witness(dom(), Real(25), opts());
  return w;
}

}  // namespace

TEST(HallRay, ThresholdBuiltin) {
  HallThreshold t = hall_threshold(dom());
  EXPECT_EQ(t.N0, 3);
  EXPECT_EQ(t.value.value, Real(16));
  EXPECT_GT(t.value.value, Real(t.N0) * dom().mu.value + dom().mu.value / 2);
}

TEST(HallRay, ThresholdScalesUnderConjugation) {
  IdealPolygonDomain raw = builtin_thrice_punctured(true);
  HallThreshold a = hall_threshold(dom()), b = hall_threshold(raw);
  EXPECT_EQ(a.N0, b.N0);
  // The builtin is the lambda = sqrt 2 conjugate of the raw model.
  EXPECT_LT(abs(b.value.value - a.value.value / 2), Real(1e-30));
}

TEST(HallRay, RejectsAtAndBelowThreshold) {
  for (Real L : {Real(16), Real(15.5), Real(3)}) {
    try {
      build_witness(dom(), L, opts());
      ADD_FAILURE() << to_decimal(L, 6);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BelowThreshold);
    }
  }
}

TEST(HallRay, StreamsLieInTheCantorSet) {
  const WitnessSpec& w = witness25();
  EXPECT_LT(abs(w.realized_L - Real(25)), Real(1e-12));
  EXPECT_EQ(Real(w.s) * 4 + w.a.point - w.b.point, w.realized_L);
  for (const CantorStream* c : {&w.a, &w.b}) {
    Word p = c->stream.prefix(dom(), 200);
    EXPECT_FALSE(dom().is_eta(p[0]));
    for (size_t i = 0; i + 4 <= p.size(); ++i)
      EXPECT_EQ(is_cuspidal(dom(), Word(p.begin() + i, p.begin() + i + 4)), CuspKind::no);
    EXPECT_LT(c->err, Real(1e-12));
  }
}

TEST(HallRay, WordStructure) {
  const WitnessSpec& w = witness25();
  Word c = w.window(dom(), -5000, 5000);
  EXPECT_TRUE(admissible(c));
  for (long k = -6; k <= 6; ++k) {
    long r = w.r(k);
    for (long n = r; n < r + w.s; ++n) EXPECT_EQ(w.letter(dom(), n), dom().eta);
    // Maximal: a_0 != eta-bar and bar b_0 != eta-bar, and neither is eta.
    EXPECT_FALSE(dom().is_eta(w.letter(dom(), r - 1)));
    EXPECT_FALSE(dom().is_eta(w.letter(dom(), r + w.s)));
    EXPECT_EQ(w.letter(dom(), r + w.s), w.a.stream.at(dom(), 0));
    EXPECT_EQ(w.letter(dom(), r - 1), w.b.stream.at(dom(), 0).inv());
  }
  EXPECT_EQ(w.block_start(1) - w.block_start(0), w.block_length(0) + 2);
  EXPECT_EQ(w.block_start(0) - w.block_start(-1), w.block_length(-1) + 2);
  EXPECT_EQ(w.block_of(w.block_start(3)), 3);
  EXPECT_EQ(w.block_of(w.block_start(-3) - 1), -4);
}

TEST(HallRay, VerifyPasses) {
  const WitnessSpec& w = witness25();
  WitnessReport R = verify_witness(dom(), w, 12);
  EXPECT_TRUE(R.pass) << (R.failures.empty() ? "" : R.failures.front());
  EXPECT_LE(R.final_deviation, Real(1e-6));
  EXPECT_LE(R.off_subsequence_max.value, Real(25) - dom().mu.value / 2);
  EXPECT_LT(R.central_spread, Real(1e-24));
  for (auto c : {"i", "ii", "iii", "iv", "central"}) EXPECT_GT(R.case_counts[c], 0) << c;
  EXPECT_EQ(R.subsequence_values.size(), 25u);
}

TEST(HallRay, SubsequenceConverges) {
  const WitnessSpec& w = witness25();
  WitnessReport R = verify_witness(dom(), w, 16);
  std::map<long, Real> dev;
  for (auto& sv : R.subsequence_values) dev[sv.k] = abs(sv.value.value - Real(25));
  for (long k : {4L, 8L, 12L}) {
    EXPECT_LT(dev[k + 4], dev[k]) << k;
    EXPECT_LT(dev[-k - 4], dev[-k]) << k;
  }
}

TEST(HallRay, PerturbedBridgeFails) {
  const WitnessSpec& base = witness25();
  // Find a bridge whose replacement creates a cuspidal factor of N+1 letters.
  bool done = false;
  for (long j = 0; j < 8 && !done; ++j) {
    for (Letter x : dom().letters()) {
      for (Letter y : dom().letters()) {
        WitnessSpec w = base;
        w.overrides[j] = {x, y};
        long end = w.block_start(j) + w.block_length(j);
        Word u = w.window(dom(), end - 4, end + 6);
        if (!admissible(u)) continue;
        bool cusp = false;
        for (size_t i = 0; i + 4 <= u.size(); ++i)
          cusp |= is_cuspidal(dom(), Word(u.begin() + i, u.begin() + i + 4)) != CuspKind::no;
        if (!cusp) continue;
        WitnessReport R = verify_witness(dom(), w, 8);
        EXPECT_FALSE(R.pass);
        EXPECT_FALSE(R.cuspidal_bounded);
        done = true;
        break;
      }
      if (done) break;
    }
  }
  EXPECT_TRUE(done);
}

TEST(HallRay, BridgeRuleAndFallback) {
  // On the builtin each letter has exactly one non-cuspidal successor.
  // a_j = e gives delta = b; bar b_{j+1} = b~ gives delta' = e~.
  bool fb = true;
  auto d = choose_bridge(dom(), 3, parse_word(dom(), "b b e"), parse_word(dom(), "b~ e~ e~"), &fb);
  EXPECT_FALSE(fb);
  EXPECT_EQ(d.first, dom().letter("b"));
  EXPECT_EQ(d.second, dom().letter("e~"));
  // bar b_{j+1} = e~ forces delta' = b~ = bar delta: the rule has no solution.
  Word left = parse_word(dom(), "b b e"), right = parse_word(dom(), "e~ b~ b~");
  d = choose_bridge(dom(), 3, left, right, &fb);
  EXPECT_TRUE(fb);
  Word u = left;
  u.push_back(d.first);
  u.push_back(d.second);
  u.insert(u.end(), right.begin(), right.end());
  EXPECT_TRUE(admissible(u));
  for (size_t i = 0; i + 4 <= u.size(); ++i)
    EXPECT_EQ(is_cuspidal(dom(), Word(u.begin() + i, u.begin() + i + 4)), CuspKind::no)
        << word_to_string(dom(), u);
}

TEST(HallRay, PeriodizedTruncationHasTargetHeight) {
  const WitnessSpec& w = witness25();
  const long k = 18;
  Word P = w.window(dom(), w.block_start(k), w.block_start(k + 3) - 2);
  Word left(P.end() - 3, P.end()), right(P.begin(), P.begin() + 3);
  auto d = choose_bridge(dom(), 3, left, right);
  P.push_back(d.first);
  P.push_back(d.second);
  HeightEstimate h = essential_height(dom(), PeriodicBiWord::purely(P));
  EXPECT_LT(abs(2 * h.value.value - w.realized_L), Real(1e-8));
}
