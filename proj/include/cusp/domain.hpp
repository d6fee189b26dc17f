#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cusp/errors.hpp"
#include "cusp/moebius.hpp"
#include "cusp/real.hpp"

namespace cusp {

/// One of the 2d side labels. `index` names the pair, `bar` picks the member.
struct Letter {
  int index = 0;
  bool bar = false;

  int id() const { return 2 * index + (bar ? 1 : 0); }
  static Letter from_id(int id) { return {id / 2, (id & 1) != 0}; }
  Letter inv() const { return {index, !bar}; }
  friend bool operator==(const Letter&, const Letter&) = default;
  friend auto operator<=>(const Letter& x, const Letter& y) { return x.id() <=> y.id(); }
};

using Word = std::vector<Letter>;

inline bool admissible(const Word& w) {
  for (size_t i = 0; i + 1 < w.size(); ++i)
    if (w[i + 1] == w[i].inv()) return false;
  return true;
}

inline Word bar_word(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto l : w) out.push_back(l.inv());
  return out;
}

/// Inverse-word convention: a_n ... a_0 becomes bar(a_0) ... bar(a_n).
inline Word bar_reverse(const Word& w) {
  Word out = bar_word(w);
  std::reverse(out.begin(), out.end());
  return out;
}

/// Closed arc of the unit circle running clockwise from `left` to `right`.
/// The boundary coordinates of both ends are kept alongside.
struct Arc {
  DiskPoint left, right;
  ExtendedReal xl, xr;

  static Arc from_x(const ExtendedReal& l, const ExtendedReal& r) {
    return {cayley(l), cayley(r), l, r};
  }
  Real length() const { return cw_distance(left.angle.value, right.angle.value); }
  /// Clockwise offset of angle t from the left end, relative to the length.
  bool contains(const Real& t, const Real& tol = 0) const {
    Real off = cw_distance(left.angle.value, t);
    Real len = length();
    return off <= len + tol || off >= two_pi() - tol;
  }
};

struct IdealPolygonDomain {
  int d = 0;
  std::vector<std::string> names;        // by letter id
  std::vector<Arc> arcs;                 // by letter id
  std::vector<MoebiusMap> gens;          // by letter id, gens[bar] = gens^-1
  Letter eta;
  RealScalar mu;
  RealScalar margulis;
  std::string label = "custom";

  // Derived by finalize().
  std::vector<DiskPoint> vertices;       // xi_0 .. xi_{2d-1}, clockwise
  std::vector<ExtendedReal> vertex_x;
  std::vector<int> order;                // letter ids clockwise starting at eta
  std::vector<int> pos;                  // inverse of order
  std::vector<std::uint8_t> left_link;   // [a*2d+b]: g_a(xi^l_b) = xi^l_a
  std::vector<std::uint8_t> right_link;  // [a*2d+b]: g_a(xi^r_b) = xi^r_a

  int size() const { return 2 * d; }
  const MoebiusMap& g(Letter l) const { return gens[l.id()]; }
  const Arc& arc(Letter l) const { return arcs[l.id()]; }
  const std::string& name(Letter l) const { return names[l.id()]; }
  Letter eta_bar() const { return eta.inv(); }
  bool is_eta(Letter l) const { return l.index == eta.index; }

  Letter letter(const std::string& n) const {
    for (int i = 0; i < size(); ++i)
      if (names[i] == n) return Letter::from_id(i);
    throw Error(ErrorCode::ParseError, "unknown letter '" + n + "'");
  }
  /// Clockwise successor and predecessor of a side.
  Letter succ(Letter l) const { return Letter::from_id(order[(pos[l.id()] + 1) % size()]); }
  Letter pred(Letter l) const {
    return Letter::from_id(order[(pos[l.id()] + size() - 1) % size()]);
  }
  bool lnk(Letter a, Letter b) const { return left_link[a.id() * size() + b.id()] != 0; }
  bool rnk(Letter a, Letter b) const { return right_link[a.id() * size() + b.id()] != 0; }

  /// Letters in id order, used for deterministic "lowest index" choices.
  std::vector<Letter> letters() const {
    std::vector<Letter> out;
    for (int i = 0; i < size(); ++i) out.push_back(Letter::from_id(i));
    return out;
  }
};

inline std::string word_to_string(const IdealPolygonDomain& D, const Word& w) {
  std::string s;
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) s += ' ';
    s += D.name(w[i]);
  }
  return s;
}

inline Word parse_word(const IdealPolygonDomain& D, const std::string& text) {
  std::istringstream in(text);
  Word w;
  std::string tok;
  while (in >> tok) w.push_back(D.letter(tok));
  return w;
}

/// Computes vertices, clockwise order and the endpoint link tables.
inline void finalize(IdealPolygonDomain& D) {
  const int n = D.size();
  if (D.d < 2) throw Error(ErrorCode::InvalidDomain, "d must be at least 2");
  if ((int)D.arcs.size() != n || (int)D.gens.size() != n || (int)D.names.size() != n)
    throw Error(ErrorCode::InvalidDomain, "tables must have 2d entries");
  if (D.eta.index < 0 || D.eta.index >= D.d)
    throw Error(ErrorCode::InvalidDomain, "eta not designated");
  D.order.clear();
  D.order.push_back(D.eta.id());
  std::vector<int> rest;
  for (int i = 0; i < n; ++i)
    if (i != D.eta.id()) rest.push_back(i);
  const Real start = D.arcs[D.eta.id()].left.angle.value;
  std::sort(rest.begin(), rest.end(), [&](int x, int y) {
    return cw_distance(start, D.arcs[x].left.angle.value) <
           cw_distance(start, D.arcs[y].left.angle.value);
  });
  D.order.insert(D.order.end(), rest.begin(), rest.end());
  D.pos.assign(n, 0);
  for (int k = 0; k < n; ++k) D.pos[D.order[k]] = k;
  D.vertices.clear();
  D.vertex_x.clear();
  for (int k = 0; k < n; ++k) {
    D.vertices.push_back(D.arcs[D.order[k]].left);
    D.vertex_x.push_back(D.arcs[D.order[k]].xl);
  }
  auto same = [](const ExtendedReal& u, const ExtendedReal& v) {
    if (u.is_inf() || v.is_inf()) {
      if (u.is_inf() && v.is_inf()) return true;
      const ExtendedReal& f = u.is_inf() ? v : u;
      return abs(f.value()) > Real(1e25);
    }
    return abs(u.value() - v.value()) <= Real(1e-20) * (1 + abs(u.value()));
  };
  D.left_link.assign(n * n, 0);
  D.right_link.assign(n * n, 0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (b == (a ^ 1)) continue;
      const MoebiusMap& g = D.gens[a];
      D.left_link[a * n + b] = same(apply(g, D.arcs[b].xl), D.arcs[a].xl);
      D.right_link[a * n + b] = same(apply(g, D.arcs[b].xr), D.arcs[a].xr);
    }
}

/// Normalized thrice-punctured sphere (m = 1, mu = 4) or the raw
/// quadrilateral with disk vertices {1, -i, -1, i} (m = 1/2, mu = 2).
inline IdealPolygonDomain builtin_thrice_punctured(bool raw = false) {
  IdealPolygonDomain D;
  D.d = 2;
  D.names = {"e", "e~", "b", "b~"};
  const int h = raw ? 1 : 2;  // mu / 2
  const ExtendedReal inf = ExtendedReal::infinity();
  D.arcs.resize(4);
  D.arcs[0] = Arc::from_x(inf, ExtendedReal(h));
  D.arcs[1] = Arc::from_x(ExtendedReal(-h), inf);
  D.arcs[2] = Arc::from_x(ExtendedReal(h), ExtendedReal(0));
  D.arcs[3] = Arc::from_x(ExtendedReal(0), ExtendedReal(-h));
  MoebiusMap p = MoebiusMap::translation(2 * h);
  MoebiusMap q = MoebiusMap::make(1, 0, raw ? 2 : 1, 1);
  D.gens = {p, inverse(p), q, inverse(q)};
  D.eta = {0, false};
  D.mu = RealScalar(Real(2 * h));
  D.margulis = RealScalar(raw ? Real(1) / 2 : Real(1));
  D.label = raw ? "t3sphere-raw" : "t3sphere";
  finalize(D);
  return D;
}

// ---------------------------------------------------------------- validation

struct ConditionResult {
  std::string name;
  bool pass = false;
  Real residual = 0;  // deviation for identities, violation for inequalities
  Real margin = 0;    // slack for inequalities
  std::string note;
};

struct ValidationReport {
  std::vector<ConditionResult> conditions;
  std::vector<std::string> notes;
  Real min_abs_c = 0;  // over enumerated group elements with c != 0
  bool pass = false;
};

/// All reduced words in the generators up to the given length, with their maps.
inline void enumerate_elements(const IdealPolygonDomain& D, int max_len,
                               const std::function<void(const Word&, const MoebiusMap&)>& f) {
  Word w;
  std::function<void(const MoebiusMap&)> rec = [&](const MoebiusMap& g) {
    if (!w.empty()) f(w, g);
    if ((int)w.size() == max_len) return;
    for (int i = 0; i < D.size(); ++i) {
      Letter l = Letter::from_id(i);
      if (!w.empty() && l == w.back().inv()) continue;
      w.push_back(l);
      rec(compose(g, D.g(l)));
      w.pop_back();
    }
  };
  rec(MoebiusMap::identity());
}

inline ValidationReport validate(const IdealPolygonDomain& D, Real tol = Real(1e-10)) {
  const int n = D.size();
  if (D.d < 2 || (int)D.arcs.size() != n || (int)D.gens.size() != n ||
      (int)D.order.size() != n)
    throw Error(ErrorCode::InvalidDomain, "structurally incomplete domain");
  ValidationReport R;
  auto add = [&](std::string name, Real residual, Real margin, bool inequality,
                 std::string note = "") {
    ConditionResult c;
    c.name = std::move(name);
    c.residual = residual;
    c.margin = margin;
    c.pass = inequality ? margin > tol : residual <= tol;
    c.note = std::move(note);
    R.conditions.push_back(c);
  };
  const Arc& ae = D.arc(D.eta);
  const Arc& aeb = D.arc(D.eta_bar());
  const Real half = D.mu.value / 2;
  MoebiusMap p = MoebiusMap::translation(D.mu.value);
  auto map_gap = [](const MoebiusMap& x, const MoebiusMap& y) {
    Real s = -1;
    for (int sg : {1, -1}) {
      Real m = std::max(std::max(abs(x.a - sg * y.a), abs(x.b - sg * y.b)),
                        std::max(abs(x.c - sg * y.c), abs(x.d - sg * y.d)));
      s = s < 0 ? m : std::min(s, m);
    }
    return s;
  };
  auto xgap = [](const ExtendedReal& u, const Real& v) {
    return u.is_inf() ? std::numeric_limits<Real>::infinity() : abs(u.value() - v);
  };

  add("1: xi_0 = 1", angle_gap(ae.left.angle.value, 0), 0, false);
  add("2: phi(xi_eta^r) = mu/2, g_eta = p",
      std::max(xgap(ae.xr, half), map_gap(D.g(D.eta), p)), 0, false);
  add("3: phi(xi_etabar^l) = -mu/2",
      std::max(xgap(aeb.xl, -half), map_gap(D.g(D.eta_bar()), inverse(p))), 0, false);

  Real max_len = 0, min_disc_gap = std::numeric_limits<Real>::infinity();
  for (int i = 0; i < n; ++i) {
    Real L = D.arcs[i].length();
    max_len = std::max(max_len, L);
    // Euclidean disc orthogonal to the unit circle through the arc ends:
    // centre at distance 1/cos(L/2), radius tan(L/2).
    Real gap = L < pi() ? (1 - sin(L / 2)) / cos(L / 2) : pi() - L;
    min_disc_gap = std::min(min_disc_gap, gap);
  }
  add("4: origin interior", min_disc_gap > 0 ? Real(0) : -min_disc_gap, min_disc_gap, true);
  add("5: side arcs shorter than pi", max_len < pi() ? Real(0) : max_len - pi(),
      pi() - max_len, true);

  Real pair_res = 0;
  for (int i = 0; i < n; ++i) {
    Letter a = Letter::from_id(i);
    const MoebiusMap& g = D.g(a);
    pair_res = std::max(pair_res, angle_gap(cayley(apply(g, D.arc(a.inv()).xr)).angle.value,
                                            D.arc(a).left.angle.value));
    pair_res = std::max(pair_res, angle_gap(cayley(apply(g, D.arc(a.inv()).xl)).angle.value,
                                            D.arc(a).right.angle.value));
    pair_res = std::max(pair_res, map_gap(D.g(a.inv()), inverse(g)));
  }
  add("pairing g_a(xi^r_abar) = xi^l_a, g_a(xi^l_abar) = xi^r_a", pair_res, 0, false);

  Real sum = 0, joint = 0;
  for (int k = 0; k < n; ++k) {
    const Arc& cur = D.arcs[D.order[k]];
    const Arc& nxt = D.arcs[D.order[(k + 1) % n]];
    sum += cur.length();
    joint = std::max(joint, angle_gap(cur.right.angle.value, nxt.left.angle.value));
  }
  add("tiling", std::max(abs(sum - two_pi()), joint), 0, false);

  Real minc = std::numeric_limits<Real>::infinity();
  enumerate_elements(D, 4, [&](const Word&, const MoebiusMap& g) {
    if (abs(g.c) > Real(1e-20)) minc = std::min(minc, abs(g.c));
  });
  R.min_abs_c = minc;
  const Real m = D.margulis.value;
  // g(U_m) is a horoball of Euclidean height 1/(c^2 m); it stays below m iff |c| >= 1/m.
  if (minc * m < 1 - tol)
    R.notes.push_back("margulis: U_m not precisely invariant (min |c| = " +
                      to_decimal(minc, 12) + ")");
  if (abs(m - 1) > tol)
    R.notes.push_back("margulis: m = " + to_decimal(m, 6) +
                      " differs from the m = 1 normalization; conjugate by lambda = " +
                      to_decimal(sqrt(1 / m), 12) + " to normalize");

  R.pass = std::all_of(R.conditions.begin(), R.conditions.end(),
                       [](const ConditionResult& c) { return c.pass; });
  return R;
}

/// Builds a domain whose non-parabolic sides are the isometric circles of
/// the inverse generators (a Ford domain). The eta sides are the vertical
/// lines Re z = +-mu/2. Arcs may be overridden afterwards.
inline IdealPolygonDomain domain_from_generators(int d, std::vector<std::string> names,
                                                 std::vector<MoebiusMap> gens, Letter eta,
                                                 RealScalar mu, RealScalar margulis) {
  IdealPolygonDomain D;
  D.d = d;
  D.names = std::move(names);
  D.gens = std::move(gens);
  D.eta = eta;
  D.mu = mu;
  D.margulis = margulis;
  if ((int)D.gens.size() != 2 * d || (int)D.names.size() != 2 * d)
    throw Error(ErrorCode::InvalidDomain, "tables must have 2d entries");
  D.arcs.resize(2 * d);
  const Real half = mu.value / 2;
  for (int i = 0; i < 2 * d; ++i) {
    Letter a = Letter::from_id(i);
    if (a == eta) {
      D.arcs[i] = Arc::from_x(ExtendedReal::infinity(), ExtendedReal(half));
    } else if (a == eta.inv()) {
      D.arcs[i] = Arc::from_x(ExtendedReal(-half), ExtendedReal::infinity());
    } else {
      const MoebiusMap& g = D.gens[i];
      if (g.c == 0)
        throw Error(ErrorCode::InvalidDomain,
                    "generator " + D.names[i] + " fixes infinity but is not eta");
      Real c0 = g.a / g.c, r = 1 / abs(g.c);
      D.arcs[i] = Arc::from_x(ExtendedReal(c0 + r), ExtendedReal(c0 - r));
    }
  }
  finalize(D);
  return D;
}

inline Arc arc_of_letter(const IdealPolygonDomain& D, Letter a) { return D.arc(a); }

}  // namespace cusp
