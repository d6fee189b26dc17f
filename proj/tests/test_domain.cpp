#include <gtest/gtest.h>

#include <cmath>

#include "cusp/domain.hpp"
#include "cusp/domain_io.hpp"

using namespace cusp;

namespace {

const ConditionResult& cond(const ValidationReport& r, const std::string& prefix) {
  for (const auto& c : r.conditions)
    if (c.name.rfind(prefix, 0) == 0) return c;
  throw std::runtime_error("no condition " + prefix);
}

/// Double-precision recomputation of the five conditions from the half-plane
/// vertices {inf, 2, 0, -2} and the generators z+4, z/(z+1).
TEST(Domain, BuiltinMatchesIndependentRecomputation) {
  auto ang = [](double x) { return -2.0 * std::atan2(1.0, x); };
  double v[4] = {0.0, ang(2.0), -M_PI, ang(-2.0) + 2 * M_PI};
  double total = 0;
  for (int k = 0; k < 4; ++k) {
    double a = v[k], b = k + 1 < 4 ? v[k + 1] : -2 * M_PI;
    double len = std::fmod(a - b + 4 * M_PI, 2 * M_PI);
    EXPECT_LT(len, M_PI);
    total += len;
  }
  EXPECT_NEAR(total, 2 * M_PI, 1e-12);
  // q(-2) = 2 and q(0) = 0 send the b~ side to the b side.
  auto q = [](double z) { return z / (z + 1); };
  EXPECT_DOUBLE_EQ(q(-2.0), 2.0);
  EXPECT_DOUBLE_EQ(q(0.0), 0.0);

  auto D = builtin_thrice_punctured();
  auto r = validate(D);
  EXPECT_TRUE(r.pass);
  for (const auto& c : r.conditions) {
    EXPECT_TRUE(c.pass) << c.name;
    EXPECT_LT(c.residual, Real(1e-10)) << c.name;
  }
  EXPECT_TRUE(r.notes.empty());
  EXPECT_EQ(D.mu.value, 4);
  EXPECT_EQ(D.margulis.value, 1);
  EXPECT_EQ(r.min_abs_c, 1);  // isometric radii 1/|c| <= m
  EXPECT_EQ(D.vertices.size(), 4u);
  for (int k = 0; k < 4; ++k)
    EXPECT_LE(angle_gap(D.vertices[k].angle.value, Real(v[k])), Real(1e-14));
}

TEST(Domain, GeneratorExamples) {
  auto D = builtin_thrice_punctured();
  Letter b = D.letter("b");
  EXPECT_EQ(apply(D.g(b), ExtendedReal(-2)).value(), 2);
  Letter e = D.letter("e");
  EXPECT_EQ(D.eta, e);
  EXPECT_EQ(D.g(e), MoebiusMap::translation(4));
  for (double x : {-3.0, 0.0, 1.5, 17.0})
    EXPECT_EQ(apply(D.g(e), ExtendedReal(Real(x))).value(), Real(x) + 4);
}

TEST(Domain, RawVariant) {
  auto D = builtin_thrice_punctured(true);
  auto r = validate(D);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(D.mu.value, 2);
  EXPECT_EQ(D.margulis.value, Real(1) / 2);
  ASSERT_EQ(r.notes.size(), 1u);
  EXPECT_NE(r.notes[0].find("normalization"), std::string::npos);
  // Disk vertices 1, -i, -1, i.
  Real expect[4] = {0, -pi() / 2, -pi(), pi() / 2};
  for (int k = 0; k < 4; ++k)
    EXPECT_LE(angle_gap(D.vertices[k].angle.value, expect[k]), Real(1e-30));
  // Conjugating by sqrt(2) recovers the normalized generators.
  auto c = conjugate_normalize({D.gens[0], D.gens[2]}, RealScalar(sqrt(Real(2))), RealScalar(0));
  auto N = builtin_thrice_punctured();
  EXPECT_TRUE(proj_equal(c.generators[0], N.gens[0], Real(1e-30)));
  EXPECT_TRUE(proj_equal(c.generators[1], N.gens[2], Real(1e-30)));
}

TEST(Domain, DiameterSideFailsConditionFive) {
  auto D = builtin_thrice_punctured();
  // Clockwise vertices at angles 0, -pi, 2pi/3, pi/3: the first side is a diameter.
  Real x1 = 0, x2 = -1 / tan(pi() / 3), x3 = -1 / tan(pi() / 6);
  D.arcs[D.letter("e").id()] = Arc::from_x(ExtendedReal::infinity(), ExtendedReal(x1));
  D.arcs[D.letter("b").id()] = Arc::from_x(ExtendedReal(x1), ExtendedReal(x2));
  D.arcs[D.letter("b~").id()] = Arc::from_x(ExtendedReal(x2), ExtendedReal(x3));
  D.arcs[D.letter("e~").id()] = Arc::from_x(ExtendedReal(x3), ExtendedReal::infinity());
  finalize(D);
  auto r = validate(D);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(cond(r, "5").pass);
  EXPECT_TRUE(cond(r, "tiling").pass);
}

TEST(Domain, MispairedFailsPairing) {
  auto D = builtin_thrice_punctured();
  Arc& a = D.arcs[D.letter("b").id()];
  a = Arc::from_x(a.xr, a.xl);
  auto r = validate(D);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(cond(r, "pairing").pass);
}

TEST(Domain, ArcsCoverCircle) {
  auto D = builtin_thrice_punctured();
  Real total = 0;
  for (const auto& a : D.arcs) total += a.length();
  EXPECT_LE(abs(total - two_pi()), Real(1e-9));
  auto eta_arc = arc_of_letter(D, D.eta);
  EXPECT_LE(angle_gap(eta_arc.right.angle.value, cayley(ExtendedReal(2)).angle.value),
            Real(1e-33));
}

TEST(Domain, GeneratorsMapSidesToSides) {
  auto D = builtin_thrice_punctured();
  for (int i = 0; i < D.size(); ++i) {
    Letter a = Letter::from_id(i);
    const Arc& src = D.arc(a.inv());
    const Arc& dst = D.arc(a);
    for (int k = 1; k <= 10; ++k) {
      HPoint z;
      Real t = Real(k) / 11;
      if (src.xl.is_inf() || src.xr.is_inf()) {
        z = {src.xl.is_inf() ? src.xr.value() : src.xl.value(), Real(k)};
      } else {
        Real c = (src.xl.value() + src.xr.value()) / 2, r = abs(src.xl.value() - src.xr.value()) / 2;
        z = {c + r * cos(pi() * t), r * sin(pi() * t)};
      }
      HPoint w = D.g(a).apply_h(z);
      if (dst.xl.is_inf() || dst.xr.is_inf()) {
        Real line = dst.xl.is_inf() ? dst.xr.value() : dst.xl.value();
        EXPECT_LE(abs(w.x - line), Real(1e-9));
      } else {
        Real c = (dst.xl.value() + dst.xr.value()) / 2, r = abs(dst.xl.value() - dst.xr.value()) / 2;
        EXPECT_LE(abs(hypot(w.x - c, w.y) - r), Real(1e-9));
      }
    }
  }
}

TEST(DomainIO, RoundTrip) {
  auto D = builtin_thrice_punctured();
  auto E = load_domain(serialize_domain(D));
  ASSERT_EQ(E.size(), D.size());
  for (int i = 0; i < D.size(); ++i) {
    EXPECT_EQ(E.names[i], D.names[i]);
    EXPECT_EQ(E.gens[i], D.gens[i]);
    EXPECT_TRUE(E.arcs[i].xl == D.arcs[i].xl);
    EXPECT_TRUE(E.arcs[i].xr == D.arcs[i].xr);
  }
  EXPECT_EQ(E.eta, D.eta);
  EXPECT_EQ(E.mu.value, D.mu.value);
  EXPECT_EQ(E.margulis.value, D.margulis.value);
  EXPECT_EQ(E.order, D.order);
}

TEST(DomainIO, FordSidesFromGenerators) {
  auto j = serialize_domain(builtin_thrice_punctured());
  j.erase("sides");
  auto E = load_domain(j);
  auto D = builtin_thrice_punctured();
  for (int i = 0; i < D.size(); ++i) {
    EXPECT_TRUE(E.arcs[i].xl == D.arcs[i].xl) << i;
    EXPECT_TRUE(E.arcs[i].xr == D.arcs[i].xr) << i;
  }
}

TEST(DomainIO, MissingEta) {
  auto j = serialize_domain(builtin_thrice_punctured());
  j.erase("eta");
  try {
    load_domain(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidDomain);
    EXPECT_NE(std::string(e.what()).find("eta not designated"), std::string::npos);
  }
}

TEST(DomainIO, BrokenInvolution) {
  auto j = serialize_domain(builtin_thrice_punctured());
  j["letters"][1]["bar_of"] = "b";
  EXPECT_THROW(load_domain(j), Error);
  EXPECT_THROW(load_domain(json::parse("[1,2]")), Error);
}

}  // namespace
