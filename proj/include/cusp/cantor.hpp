#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cusp/cuspidal.hpp"
#include "cusp/domain.hpp"
#include "cusp/errors.hpp"
#include "cusp/expansion.hpp"
#include "cusp/moebius.hpp"

namespace cusp {

/// Points whose expansion has no cuspidal factor of length N+1 and whose
/// first letter is not eta or eta-bar, seen through the boundary coordinate.
struct CantorSpec {
  IdealPolygonDomain domain;
  int N = 2;

  CantorSpec() = default;
  CantorSpec(IdealPolygonDomain D, int n) : domain(std::move(D)), N(n) {
    if (N < 2) throw Error(ErrorCode::PreconditionFailed, "N must be at least 2");
  }
};

struct Interval {
  Real lo = 0, hi = 0;
  Real length() const { return hi - lo; }
  bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

struct HoleRecord {
  Interval gap;
  Interval host;
  Real err = 0;
  int level = 0;
  std::string word;  // provenance a_0 ... a_{n-1}
  int vertex = -1;   // vertex index of the transported level-zero gap
  Real length() const { return gap.length(); }
};

/// Node of a lazily expanded Cantor tree. `level` is the number of letters
/// minus one; the root has level -1. The payload is owned by the node, so
/// discarded branches free their state.
struct CantorNode {
  Interval hull;
  Real err = 0;
  int level = -1;
  std::string word;
  std::shared_ptr<const void> payload;
};

struct NodeExpansion {
  std::vector<CantorNode> children;  // increasing position
  std::vector<HoleRecord> holes;     // between consecutive children
};

/// A Cantor set presented as a tree of nested hulls. Sources are immutable
/// once built, so one source may serve several threads.
class CantorSource {
 public:
  virtual ~CantorSource() = default;
  virtual CantorNode root() const = 0;
  virtual NodeExpansion expand(const CantorNode& n) const = 0;
};

using CantorSourcePtr = std::shared_ptr<CantorSource>;

// ---------------------------------------------------------------- boundary Cantor set

/// Automaton state: last letter and the lengths of the left and right
/// cuspidal suffixes.
struct CantorState {
  int letter = 0;
  int L = 1, R = 1;
};

class CuspAutomaton {
 public:
  /// With `precompute` every extreme is evaluated up front and the automaton
  /// is read-only afterwards; otherwise extremes are memoized on demand.
  CuspAutomaton(const IdealPolygonDomain& D, int N, bool precompute = false) : D_(&D), N_(N) {
    const int n = D.size();
    first_.assign(n * (N + 1) * (N + 1), std::nullopt);
    last_ = first_;
    if (!precompute) return;
    for (int a = 0; a < n; ++a)
      for (int L = 1; L <= N; ++L)
        for (int R = 1; R <= N; ++R) {
          extreme(id({a, L, R}), true);
          extreme(id({a, L, R}), false);
        }
  }

  int N() const { return N_; }
  int id(const CantorState& s) const { return (s.letter * (N_ + 1) + s.L) * (N_ + 1) + s.R; }
  CantorState state(int id) const {
    return {id / ((N_ + 1) * (N_ + 1)), (id / (N_ + 1)) % (N_ + 1), id % (N_ + 1)};
  }
  Letter letter(int id) const { return Letter::from_id(state(id).letter); }

  /// Allowed successor states in clockwise order of the child arcs.
  std::vector<int> successors(int sid) const {
    CantorState s = state(sid);
    Letter a = Letter::from_id(s.letter);
    std::vector<int> out;
    for (Letter b : children_cw(*D_, a)) {
      int L = D_->lnk(a, b) ? s.L + 1 : 1;
      int R = D_->rnk(a, b) ? s.R + 1 : 1;
      if (L <= N_ && R <= N_) out.push_back(id({b.id(), L, R}));
    }
    return out;
  }

  /// Clockwise-first (largest x) and clockwise-last points of the set of
  /// continuations of a state, inside the side arc of its letter.
  const ExtendedReal& first_point(int sid) { return extreme(sid, true); }
  const ExtendedReal& last_point(int sid) { return extreme(sid, false); }
  const ExtendedReal& first_point(int sid) const { return *first_.at(sid); }
  const ExtendedReal& last_point(int sid) const { return *last_.at(sid); }

 private:
  const ExtendedReal& extreme(int sid, bool first) {
    auto& memo = first ? first_ : last_;
    if (memo[sid]) return *memo[sid];
    // The extreme path is eventually periodic; its limit is the attracting
    // fixed point of the cycle, pulled back through the prefix.
    std::vector<int> path;
    std::map<int, size_t> seen;
    int cur = sid;
    while (!seen.count(cur)) {
      seen[cur] = path.size();
      path.push_back(cur);
      auto next = successors(cur);
      cur = first ? next.front() : next.back();
    }
    size_t k = seen[cur];
    MoebiusMap P, H;
    for (size_t i = 0; i < k; ++i) P = compose(P, D_->g(letter(path[i])));
    for (size_t i = k; i < path.size(); ++i) H = compose(H, D_->g(letter(path[i])));
    ExtendedReal fp = attracting_fixed_point(H);
    memo[sid] = apply(P, fp);
    return *memo[sid];
  }

  const IdealPolygonDomain* D_;
  int N_;
  std::vector<std::optional<ExtendedReal>> first_, last_;
};

class BoundaryCantor : public CantorSource {
 public:
  explicit BoundaryCantor(CantorSpec spec)
      : spec_(std::make_shared<CantorSpec>(std::move(spec))), aut_(spec_->domain, spec_->N, true) {
    root_exp_ = expand_root();
    root_.hull = {root_exp_.children.front().hull.lo, root_exp_.children.back().hull.hi};
    root_.err = std::max(root_exp_.children.front().err, root_exp_.children.back().err);
    root_.level = -1;
  }
  BoundaryCantor(const BoundaryCantor&) = delete;
  BoundaryCantor& operator=(const BoundaryCantor&) = delete;

  const CantorSpec& spec() const { return *spec_; }
  const CuspAutomaton& automaton() const { return aut_; }

  CantorNode root() const override { return root_; }

  NodeExpansion expand(const CantorNode& n) const override {
    if (!n.payload) return root_exp_;
    const auto& p = *std::static_pointer_cast<const Payload>(n.payload);
    MoebiusMap G = compose(p.G, spec_->domain.g(aut_.letter(p.state)));
    auto next = aut_.successors(p.state);
    std::vector<int> states(next.rbegin(), next.rend());
    return make_children(n.word, G, states, n.level + 1, n.hull);
  }

 private:
  struct Payload {
    MoebiusMap G;  // product over all letters but the last
    int state = -1;
  };

  NodeExpansion expand_root() const {
    const IdealPolygonDomain& D = spec_->domain;
    std::vector<int> states;
    for (auto it = D.order.rbegin(); it != D.order.rend(); ++it) {
      Letter a = Letter::from_id(*it);
      if (D.is_eta(a)) continue;
      states.push_back(aut_.id({a.id(), 1, 1}));
    }
    return make_children("", MoebiusMap(), states, 0, Interval{});
  }

  // `states` are in increasing-x order, i.e. reverse clockwise.
  NodeExpansion make_children(const std::string& prov, const MoebiusMap& G,
                              const std::vector<int>& states, int level,
                              const Interval& host) const {
    const IdealPolygonDomain& D = spec_->domain;
    NodeExpansion out;
    for (int sid : states) {
      ExtendedReal lo = apply(G, aut_.last_point(sid));
      ExtendedReal hi = apply(G, aut_.first_point(sid));
      if (lo.is_inf() || hi.is_inf())
        throw Error(ErrorCode::PoleProximity, "Cantor hull reaches infinity");
      CantorNode c;
      c.hull = {lo.value(), hi.value()};
      c.err = std::max(lo.err(), hi.err());
      c.level = level;
      c.word = prov.empty() ? D.name(aut_.letter(sid)) : prov + " " + D.name(aut_.letter(sid));
      c.payload = std::make_shared<const Payload>(Payload{G, sid});
      out.children.push_back(std::move(c));
    }
    for (size_t i = 0; i + 1 < out.children.size(); ++i) {
      const CantorNode& a = out.children[i];
      const CantorNode& b = out.children[i + 1];
      HoleRecord h;
      h.gap = {a.hull.hi, b.hull.lo};
      h.host = level == 0 ? Interval{out.children.front().hull.lo, out.children.back().hull.hi}
                          : host;
      h.err = std::max(a.err, b.err);
      h.level = level;
      h.word = prov;
      // Between a (later clockwise) and b lies the left end of a's side.
      int sa = std::static_pointer_cast<const Payload>(a.payload)->state;
      h.vertex = D.pos[aut_.letter(sa).id()];
      out.holes.push_back(std::move(h));
    }
    return out;
  }

  std::shared_ptr<const CantorSpec> spec_;
  CuspAutomaton aut_;
  NodeExpansion root_exp_;
  CantorNode root_;
};

// ---------------------------------------------------------------- synthetic sets

/// Self-similar set on [lo, hi]; `pieces` are sub-intervals of [0, 1] in
/// increasing order, the first starting at 0 and the last ending at 1.
class AffineCantor : public CantorSource {
 public:
  AffineCantor(Real lo, Real hi, std::vector<Interval> pieces)
      : lo_(lo), hi_(hi), pieces_(std::move(pieces)) {
    if (pieces_.size() < 2 || pieces_.front().lo != 0 || pieces_.back().hi != 1)
      throw Error(ErrorCode::PreconditionFailed, "pieces must cover the ends of [0, 1]");
    for (size_t i = 0; i + 1 < pieces_.size(); ++i)
      if (!(pieces_[i].hi < pieces_[i + 1].lo))
        throw Error(ErrorCode::PreconditionFailed, "pieces must be disjoint and ordered");
  }

  /// Middle-(1/k) set: two pieces of length (1 - 1/k)/2.
  static std::shared_ptr<AffineCantor> middle(Real lo, Real hi, int k) {
    Real p = (1 - Real(1) / k) / 2;
    return std::make_shared<AffineCantor>(lo, hi, std::vector<Interval>{{0, p}, {1 - p, 1}});
  }

  CantorNode root() const override { return {{lo_, hi_}, 0, -1, "", nullptr}; }

  NodeExpansion expand(const CantorNode& n) const override {
    NodeExpansion out;
    const Real a = n.hull.lo, len = n.hull.length();
    for (size_t i = 0; i < pieces_.size(); ++i) {
      CantorNode c;
      c.hull = {a + len * pieces_[i].lo, a + len * pieces_[i].hi};
      c.level = n.level + 1;
      c.word = n.word + std::to_string(i);
      out.children.push_back(std::move(c));
    }
    for (size_t i = 0; i + 1 < out.children.size(); ++i) {
      HoleRecord h;
      h.gap = {out.children[i].hull.hi, out.children[i + 1].hull.lo};
      h.host = n.hull;
      h.level = n.level + 1;
      h.word = n.word;
      h.vertex = (int)i;
      out.holes.push_back(std::move(h));
    }
    return out;
  }

 private:
  Real lo_, hi_;
  std::vector<Interval> pieces_;
};

/// Image of a source under x -> scale*x + shift, scale != 0.
class AffineView : public CantorSource {
 public:
  AffineView(CantorSourcePtr base, Real scale, Real shift)
      : base_(std::move(base)), scale_(scale), shift_(shift) {
    if (scale_ == 0) throw Error(ErrorCode::PreconditionFailed, "affine scale must be nonzero");
  }

  CantorNode root() const override { return map_node(base_->root()); }

  NodeExpansion expand(const CantorNode& n) const override {
    NodeExpansion e = base_->expand(*std::static_pointer_cast<const CantorNode>(n.payload));
    NodeExpansion out;
    for (auto& c : e.children) out.children.push_back(map_node(c));
    for (auto& h : e.holes) {
      HoleRecord m = h;
      m.gap = map(h.gap);
      m.host = map(h.host);
      m.err = abs(scale_) * h.err;
      out.holes.push_back(std::move(m));
    }
    if (scale_ < 0) {
      std::reverse(out.children.begin(), out.children.end());
      std::reverse(out.holes.begin(), out.holes.end());
    }
    return out;
  }

  Interval map(const Interval& I) const {
    if (scale_ > 0) return {scale_ * I.lo + shift_, scale_ * I.hi + shift_};
    return {scale_ * I.hi + shift_, scale_ * I.lo + shift_};
  }
  Real map(const Real& x) const { return scale_ * x + shift_; }
  /// Inverse map, back to the base coordinate.
  Real unmap(const Real& y) const { return (y - shift_) / scale_; }
  Real scale() const { return scale_; }
  Real shift() const { return shift_; }

 private:
  CantorNode map_node(const CantorNode& c) const {
    CantorNode m = c;
    m.hull = map(c.hull);
    m.err = abs(scale_) * c.err;
    m.payload = std::make_shared<const CantorNode>(c);
    return m;
  }

  CantorSourcePtr base_;
  Real scale_;
  Real shift_;
};

// ---------------------------------------------------------------- frontier

/// Unexpanded nodes and known holes inside one interval. The largest hole
/// is found best-first: any hole below a node is shorter than its hull.
class Frontier {
 public:
  void add(const CantorNode& n) {
    nodes_.push_back(n);
    std::push_heap(nodes_.begin(), nodes_.end(), node_less);
  }
  void add(const HoleRecord& h) {
    holes_.push_back(h);
    std::push_heap(holes_.begin(), holes_.end(), hole_less);
  }
  bool empty() const { return nodes_.empty() && holes_.empty(); }

  /// Largest hole longer than `floor`, expanding nodes as needed.
  const HoleRecord* peek(const CantorSource& src, Real floor = Real(0)) {
    while (!nodes_.empty()) {
      Real top = nodes_.front().hull.length();
      if (top <= floor) break;
      if (!holes_.empty() && holes_.front().length() >= top) break;
      std::pop_heap(nodes_.begin(), nodes_.end(), node_less);
      CantorNode n = std::move(nodes_.back());
      nodes_.pop_back();
      NodeExpansion e = src.expand(n);
      for (auto& c : e.children) add(c);
      for (auto& h : e.holes) add(h);
      ++expanded_;
    }
    if (holes_.empty() || holes_.front().length() <= floor) return nullptr;
    return &holes_.front();
  }

  std::optional<HoleRecord> pop(const CantorSource& src, Real floor = Real(0)) {
    if (!peek(src, floor)) return std::nullopt;
    std::pop_heap(holes_.begin(), holes_.end(), hole_less);
    HoleRecord h = std::move(holes_.back());
    holes_.pop_back();
    return h;
  }

  /// Upper bound for any hole not yet returned.
  Real tail_bound() const {
    Real b = 0;
    if (!nodes_.empty()) b = nodes_.front().hull.length();
    if (!holes_.empty()) b = std::max(b, holes_.front().length());
    return b;
  }

  /// Partition around a removed hole. Nothing straddles it, because every
  /// node longer than the hole has already been expanded. Sides are decided
  /// by midpoints: recomputed hull endpoints may overlap the gap by an ulp.
  std::pair<Frontier, Frontier> split(const Interval& gap) && {
    Frontier l, r;
    const Real c = gap.lo + gap.hi;
    for (auto& n : nodes_) (n.hull.lo + n.hull.hi < c ? l : r).add(n);
    for (auto& h : holes_) (h.gap.lo + h.gap.hi < c ? l : r).add(h);
    return {std::move(l), std::move(r)};
  }

  long expanded() const { return expanded_; }

 private:
  static bool node_less(const CantorNode& a, const CantorNode& b) {
    return a.hull.length() < b.hull.length();
  }
  static bool hole_less(const HoleRecord& a, const HoleRecord& b) {
    if (a.length() != b.length()) return a.length() < b.length();
    return a.gap.lo > b.gap.lo;
  }

  std::vector<CantorNode> nodes_;
  std::vector<HoleRecord> holes_;
  long expanded_ = 0;
};

// ---------------------------------------------------------------- slow subdivisions

struct SubdivisionStep {
  Interval host, left, right;
  HoleRecord hole;
};

struct SlowSubdivision {
  Interval hull;
  std::vector<SubdivisionStep> steps;
  Real tail_bound = 0;  // no unexamined hole is longer than this
};

/// Holes of a source in non-increasing length, each split off the current
/// interval that contains it.
class MonotoneHoleStream {
 public:
  explicit MonotoneHoleStream(CantorSourcePtr src) : src_(std::move(src)) {
    CantorNode r = src_->root();
    hull_ = r.hull;
    frontier_.add(r);
    current_[hull_.lo] = hull_.hi;
  }

  const Interval& hull() const { return hull_; }

  std::optional<SubdivisionStep> next() {
    auto h = frontier_.pop(*src_, Real(1e-60));
    if (!h) return std::nullopt;
    auto it = current_.upper_bound(h->gap.lo);
    if (it == current_.begin()) throw Error(ErrorCode::InvalidDomain, "hole outside hull");
    --it;
    SubdivisionStep s;
    s.host = {it->first, it->second};
    s.left = {s.host.lo, h->gap.lo};
    s.right = {h->gap.hi, s.host.hi};
    s.hole = *h;
    current_.erase(it);
    current_[s.left.lo] = s.left.hi;
    current_[s.right.lo] = s.right.hi;
    return s;
  }

  Real tail_bound() const { return frontier_.tail_bound(); }
  long expanded() const { return frontier_.expanded(); }

 private:
  CantorSourcePtr src_;
  Interval hull_;
  Frontier frontier_;
  std::map<Real, Real> current_;
};

inline SlowSubdivision monotone_prefix(CantorSourcePtr src, long budget) {
  MonotoneHoleStream s(std::move(src));
  SlowSubdivision out;
  out.hull = s.hull();
  for (long i = 0; i < budget; ++i) {
    auto st = s.next();
    if (!st) break;
    out.steps.push_back(std::move(*st));
  }
  out.tail_bound = s.tail_bound();
  return out;
}

/// Replays the holes of `sub` in non-increasing length order (ties by
/// position) and recomputes hosts and flanks.
inline SlowSubdivision reorder_monotone(const Interval& hull, std::vector<HoleRecord> holes) {
  std::stable_sort(holes.begin(), holes.end(), [](const HoleRecord& a, const HoleRecord& b) {
    if (a.length() != b.length()) return a.length() > b.length();
    return a.gap.lo < b.gap.lo;
  });
  SlowSubdivision out;
  out.hull = hull;
  std::map<Real, Real> cur{{hull.lo, hull.hi}};
  for (auto& h : holes) {
    auto it = cur.upper_bound(h.gap.lo);
    if (it == cur.begin()) throw Error(ErrorCode::PreconditionFailed, "hole outside hull");
    --it;
    SubdivisionStep s;
    s.host = {it->first, it->second};
    if (!(s.host.lo < h.gap.lo && h.gap.hi < s.host.hi))
      throw Error(ErrorCode::PreconditionFailed, "holes overlap or touch the hull ends");
    s.left = {s.host.lo, h.gap.lo};
    s.right = {h.gap.hi, s.host.hi};
    s.hole = h;
    cur.erase(it);
    cur[s.left.lo] = s.left.hi;
    cur[s.right.lo] = s.right.hi;
    out.steps.push_back(std::move(s));
  }
  return out;
}

/// Conditions (1)-(3) of a slow subdivision on a finite prefix: every step
/// splits one current interval into two non-empty closed pieces around an
/// open hole. With `monotone`, hole lengths must be non-increasing.
inline bool verify_slow_subdivision(const SlowSubdivision& s, bool monotone = false,
                                    std::string* why = nullptr) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  std::map<Real, Real> cur{{s.hull.lo, s.hull.hi}};
  for (size_t i = 0; i < s.steps.size(); ++i) {
    const auto& st = s.steps[i];
    auto it = cur.find(st.host.lo);
    if (it == cur.end() || it->second != st.host.hi)
      return fail("step " + std::to_string(i) + ": host is not a current interval");
    if (!(st.host.lo < st.hole.gap.lo && st.hole.gap.lo < st.hole.gap.hi &&
          st.hole.gap.hi < st.host.hi))
      return fail("step " + std::to_string(i) + ": hole not strictly inside host");
    if (!(st.left == Interval{st.host.lo, st.hole.gap.lo}) ||
        !(st.right == Interval{st.hole.gap.hi, st.host.hi}))
      return fail("step " + std::to_string(i) + ": flanks do not match");
    if (monotone && i > 0 && st.hole.length() > s.steps[i - 1].hole.length())
      return fail("step " + std::to_string(i) + ": hole longer than its predecessor");
    cur.erase(it);
    cur[st.left.lo] = st.left.hi;
    cur[st.right.lo] = st.right.hi;
    if (cur.size() != i + 2) return fail("interval count mismatch");
  }
  return true;
}

struct StableGapReport {
  bool pass = true;
  Real eps = 0;
  long holes_examined = 0;
  Real worst_ratio = 0;
  long worst_index = -1;
  std::optional<SubdivisionStep> violation;
  long violation_index = -1;
  Real tail_bound = 0;
};

/// |B|/|K^L| < 1 - eps and |B|/|K^R| < 1 - eps at every step.
inline StableGapReport check_stable_gap(const SlowSubdivision& s, Real eps) {
  if (!(eps > 0 && eps < 1)) throw Error(ErrorCode::PreconditionFailed, "eps must lie in (0, 1)");
  StableGapReport r;
  r.eps = eps;
  r.tail_bound = s.tail_bound;
  for (size_t i = 0; i < s.steps.size(); ++i) {
    const auto& st = s.steps[i];
    Real b = st.hole.length();
    Real ratio = b / std::min(st.left.length(), st.right.length());
    if (ratio > r.worst_ratio) {
      r.worst_ratio = ratio;
      r.worst_index = (long)i;
    }
    if (!(ratio < 1 - eps) && r.pass) {
      r.pass = false;
      r.violation = st;
      r.violation_index = (long)i;
    }
  }
  r.holes_examined = (long)s.steps.size();
  return r;
}

inline StableGapReport check_stable_gap(CantorSourcePtr src, Real eps, long hole_budget) {
  if (hole_budget < 1) throw Error(ErrorCode::PreconditionFailed, "hole budget must be positive");
  return check_stable_gap(monotone_prefix(std::move(src), hole_budget), eps);
}

inline StableGapReport check_stable_gap(const CantorSpec& spec, Real eps, long hole_budget) {
  return check_stable_gap(std::make_shared<BoundaryCantor>(spec), eps, hole_budget);
}

struct SizeReport {
  bool pass = true;
  Real eps = 0;
  Real largest_hole_a = 0, largest_hole_b = 0;
  Real length_a = 0, length_b = 0;
  Real margin = 0;  // min over both sides of (1-eps)|hull| - |hole|
};

/// |B| <= (1-eps)|F| and |C| <= (1-eps)|K| for every hole; it suffices to
/// test the largest hole of each set.
inline SizeReport check_size_condition(CantorSourcePtr a, CantorSourcePtr b, Real eps) {
  if (!(eps > 0 && eps < 1)) throw Error(ErrorCode::PreconditionFailed, "eps must lie in (0, 1)");
  SizeReport r;
  r.eps = eps;
  auto largest = [](CantorSourcePtr s, Real& len) {
    Frontier f;
    CantorNode root = s->root();
    len = root.hull.length();
    f.add(root);
    const HoleRecord* h = f.peek(*s, Real(1e-60));
    return h ? h->length() : Real(0);
  };
  r.largest_hole_a = largest(a, r.length_a);
  r.largest_hole_b = largest(b, r.length_b);
  Real ma = (1 - eps) * r.length_b - r.largest_hole_a;
  Real mb = (1 - eps) * r.length_a - r.largest_hole_b;
  r.margin = std::min(ma, mb);
  r.pass = ma >= 0 && mb >= 0;
  return r;
}

inline SizeReport check_size_condition(const CantorSpec& specA, long shiftA,
                                       const CantorSpec& specB, long shiftB, Real eps) {
  auto view = [](const CantorSpec& s, long shift) -> CantorSourcePtr {
    return std::make_shared<AffineView>(std::make_shared<BoundaryCantor>(s), Real(1),
                                        Real(shift) * s.domain.mu.value);
  };
  return check_size_condition(view(specA, shiftA), view(specB, shiftB), eps);
}

// ---------------------------------------------------------------- approximations

struct IntervalRecord {
  Interval interval;
  Real err = 0;
  int level = 0;
  std::string word;
};

struct CantorApproximation {
  CantorSpec spec;
  int depth = 0;
  Interval hull;
  std::vector<IntervalRecord> intervals;  // increasing
  std::vector<HoleRecord> holes;          // increasing position
  std::vector<HoleRecord> outer_gaps;     // [-mu/2, m_N) and (M_N, mu/2]
};

/// All holes of level <= depth removed; the surviving intervals are the
/// hulls of the level-depth nodes.
inline CantorApproximation build_approximation(const CantorSpec& spec, int depth) {
  if (depth < 0) throw Error(ErrorCode::PreconditionFailed, "depth must be non-negative");
  const BoundaryCantor src(spec);
  const IdealPolygonDomain& D = spec.domain;
  CantorApproximation out;
  out.spec = spec;
  out.depth = depth;
  CantorNode root = src.root();
  out.hull = root.hull;
  std::vector<CantorNode> layer{root};
  for (int lev = 0; lev <= depth; ++lev) {
    std::vector<CantorNode> next;
    for (auto& n : layer) {
      NodeExpansion e = src.expand(n);
      for (auto& h : e.holes) out.holes.push_back(h);
      for (auto& c : e.children) next.push_back(std::move(c));
    }
    layer = std::move(next);
  }
  for (auto& n : layer) out.intervals.push_back({n.hull, n.err, n.level, n.word});
  std::sort(out.holes.begin(), out.holes.end(),
            [](const HoleRecord& a, const HoleRecord& b) { return a.gap.lo < b.gap.lo; });
  const Real h = D.mu.value / 2;
  HoleRecord lo, hi;
  lo.gap = {-h, root.hull.lo};
  hi.gap = {root.hull.hi, h};
  lo.host = hi.host = {-h, h};
  lo.err = hi.err = root.err;
  lo.level = hi.level = 0;
  lo.vertex = D.pos[D.eta_bar().id()];
  hi.vertex = D.pos[D.eta.id()] + 1;
  out.outer_gaps = {lo, hi};
  return out;
}

/// Total of intervals plus holes minus the hull length.
inline Real approximation_defect(const CantorApproximation& a) {
  Real s = 0;
  for (auto& i : a.intervals) s += i.interval.length();
  for (auto& h : a.holes) s += h.length();
  return abs(s - a.hull.length());
}

/// Holes of an approximation replayed in monotone order.
inline SlowSubdivision monotone_subdivision(const CantorApproximation& a) {
  return reorder_monotone(a.hull, a.holes);
}

inline std::string cantor_csv(const CantorApproximation& a) {
  std::ostringstream os;
  os << "level,left,right,kind,provenance_word,vertex\n";
  struct Row {
    Real lo;
    std::string line;
  };
  std::vector<Row> rows;
  auto fmt = [](const Real& x) { return to_decimal(x, 30); };
  for (auto& i : a.intervals)
    rows.push_back({i.interval.lo, std::to_string(i.level) + "," + fmt(i.interval.lo) + "," +
                                       fmt(i.interval.hi) + ",interval," + i.word + ","});
  auto hole_row = [&](const HoleRecord& h, const char* kind) {
    rows.push_back({h.gap.lo, std::to_string(h.level) + "," + fmt(h.gap.lo) + "," +
                                  fmt(h.gap.hi) + "," + kind + "," + h.word + "," +
                                  std::to_string(h.vertex)});
  };
  for (auto& h : a.holes) hole_row(h, "hole");
  for (auto& h : a.outer_gaps) hole_row(h, "outer_gap");
  std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return x.lo < y.lo; });
  for (auto& r : rows) os << r.line << "\n";
  return os.str();
}

// ---------------------------------------------------------------- extrema

struct Extrema {
  RealScalar m, M;
};

/// m_N and M_N in closed form: each is the image of the attracting fixed
/// point of the cycle reached by the extreme admissible stream. `tol` only
/// bounds the reported err from below.
inline Extrema extrema(const CantorSpec& spec, Real tol = Real(1e-30)) {
  if (!(tol > 0)) throw Error(ErrorCode::PreconditionFailed, "tol must be positive");
  BoundaryCantor src(spec);
  CantorNode r = src.root();
  Real e = std::max(r.err, Real(0));
  return {RealScalar(r.hull.lo, e), RealScalar(r.hull.hi, e)};
}

/// Arc lengths of the level-zero gaps B[xi_i] of the unrestricted set (no
/// first-letter condition), indexed by vertex.
inline std::vector<Real> level_zero_gaps(const IdealPolygonDomain& D, int N) {
  CuspAutomaton aut(D, N);
  std::vector<Real> out(D.size());
  for (int k = 0; k < D.size(); ++k) {
    Letter before = Letter::from_id(D.order[(k + D.size() - 1) % D.size()]);
    Letter after = Letter::from_id(D.order[k]);
    Real a = cayley(aut.last_point(aut.id({before.id(), 1, 1}))).angle.value;
    Real b = cayley(aut.first_point(aut.id({after.id(), 1, 1}))).angle.value;
    out[k] = cw_distance(a, b);
  }
  return out;
}

struct RatioProfile {
  Real level_zero = 0;          // max |B[xi]| / |K[alpha]| on the circle
  std::vector<Real> per_level;  // worst hole / adjacent interval ratio in the tree
};

/// Hole-to-interval ratios measured in arc length on the circle.
inline RatioProfile ratio_profile(const CantorSpec& spec, int max_level) {
  const IdealPolygonDomain& D = spec.domain;
  RatioProfile out;
  CuspAutomaton aut(D, spec.N);
  auto theta = [](const Real& x) { return cayley(ExtendedReal(x)).angle.value; };
  auto gaps = level_zero_gaps(D, spec.N);
  for (int k = 0; k < D.size(); ++k) {
    for (int side = 0; side < 2; ++side) {
      Letter a = Letter::from_id(D.order[(k + D.size() - side) % D.size()]);
      int sid = aut.id({a.id(), 1, 1});
      Real len = cw_distance(cayley(aut.first_point(sid)).angle.value,
                             cayley(aut.last_point(sid)).angle.value);
      out.level_zero = std::max(out.level_zero, gaps[k] / len);
    }
  }
  BoundaryCantor src(spec);
  std::vector<CantorNode> layer{src.root()};
  for (int lev = 0; lev <= max_level; ++lev) {
    Real worst = 0;
    std::vector<CantorNode> next;
    for (auto& n : layer) {
      NodeExpansion e = src.expand(n);
      for (size_t i = 0; i < e.holes.size(); ++i) {
        auto arc = [&](const Interval& I) { return cw_distance(theta(I.hi), theta(I.lo)); };
        Real b = arc(e.holes[i].gap);
        worst = std::max(worst, b / arc(e.children[i].hull));
        worst = std::max(worst, b / arc(e.children[i + 1].hull));
      }
      for (auto& c : e.children) next.push_back(std::move(c));
    }
    out.per_level.push_back(worst);
    layer = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------- N_0 search

struct N0Entry {
  int N = 0;
  StableGapReport gap;
  SizeReport size;
  Extrema ext;
  bool wide = false;  // M_N - m_N > mu/2
  bool pass() const { return gap.pass && size.pass && wide; }
};

struct N0Result {
  int N0 = -1;
  Real eps = 0;
  long budget = 0;
  std::vector<N0Entry> trail;
};

inline N0Entry evaluate_n(const IdealPolygonDomain& D, int N, Real eps, long budget) {
  CantorSpec spec(D, N);
  N0Entry e;
  e.N = N;
  auto src = std::make_shared<BoundaryCantor>(spec);
  e.gap = check_stable_gap(src, eps, budget);
  e.size = check_size_condition(spec, 0, spec, 1, eps);
  e.ext = extrema(spec);
  e.wide = e.ext.M.value - e.ext.m.value > D.mu.value / 2;
  return e;
}

/// Smallest N passing the eps-stable gap check over `budget` monotone holes,
/// the size condition, and M_N - m_N > mu/2.
inline N0Result find_n0(const IdealPolygonDomain& D, Real eps = Real(0.1), long budget = 2000,
                        int n_max = 40) {
  N0Result r;
  r.eps = eps;
  r.budget = budget;
  for (int N = 2; N <= n_max; ++N) {
    r.trail.push_back(evaluate_n(D, N, eps, budget));
    if (r.trail.back().pass()) {
      r.N0 = N;
      return r;
    }
  }
  throw Error(ErrorCode::StableGapNotSatisfied,
              "no N <= " + std::to_string(n_max) + " passes the stable gap search");
}

// ---------------------------------------------------------------- distortion

/// Radius and centre distance of the disc B_a bounded by the circle through
/// side s_a orthogonal to the unit circle.
inline Real side_disc_diameter(const IdealPolygonDomain& D, Letter a) {
  Real L = D.arc(a).length();
  if (L >= pi() - Real(1e-20))
    throw Error(ErrorCode::UnboundedDisc, "side " + D.name(a) + " is a diameter or longer");
  return 2 * tan(L / 2);
}

/// C = (2 + max diam B_a) / (min arc length / 2).
inline RealScalar distortion_constant(const IdealPolygonDomain& D) {
  Real maxd = 0, minl = two_pi();
  for (Letter a : D.letters()) {
    maxd = std::max(maxd, side_disc_diameter(D, a));
    minl = std::min(minl, D.arc(a).length());
  }
  Real C = (2 + maxd) / (minl / 2);
  return RealScalar(C, 64 * eps() * C);
}

/// Euclidean distance from the boundary point at angle t to the disc B_a.
inline Real distance_to_side_disc(const IdealPolygonDomain& D, Letter a, const Real& t) {
  const Arc& arc = D.arc(a);
  Real L = arc.length();
  Real mid = arc.left.angle.value - L / 2;
  Real cd = 1 / cos(L / 2), r = tan(L / 2);
  Real dx = cos(t) - cd * cos(mid), dy = sin(t) - cd * sin(mid);
  return std::max(Real(0), sqrt(dx * dx + dy * dy) - r);
}

struct DistortionCheck {
  Real C = 0;
  Real worst = 0;  // max over samples of max(q, 1/q), q the distortion quotient
  long samples = 0;
  bool pass = false;
};

/// Random admissible words and boundary triples in the moon of the inverse
/// of the last letter, which is where the pole of g_{a_0} ... g_{a_n} lies.
/// Compares the quotient of chordal distance ratios against C.
inline DistortionCheck check_distortion(const IdealPolygonDomain& D, int words, std::uint64_t seed,
                                        int max_len = 8, int triples_per_word = 5) {
  DistortionCheck out;
  out.C = distortion_constant(D).value;
  Real minl = two_pi();
  for (Letter a : D.letters()) minl = std::min(minl, D.arc(a).length());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-3.14159265358979, 3.14159265358979);
  auto chord = [](const Real& a, const Real& b) { return 2 * abs(sin((a - b) / 2)); };
  for (int k = 0; k < words; ++k) {
    int len = 1 + (int)(rng() % max_len);
    Word w;
    while ((int)w.size() < len) {
      Letter l = Letter::from_id((int)(rng() % D.size()));
      if (!w.empty() && l == w.back().inv()) continue;
      w.push_back(l);
    }
    MoebiusMap G = word_map(D, w);
    Letter moon = w.back().inv();
    for (int t = 0; t < triples_per_word; ++t) {
      Real th[3];
      for (int i = 0; i < 3; ++i) {
        do {
          th[i] = Real(U(rng));
        } while (distance_to_side_disc(D, moon, th[i]) < minl / 2);
      }
      if (chord(th[0], th[1]) < Real(1e-6) || chord(th[0], th[2]) < Real(1e-6)) continue;
      Real im[3];
      for (int i = 0; i < 3; ++i)
        im[i] = cayley(apply(G, inv_cayley(DiskPoint(th[i])))).angle.value;
      Real before = chord(th[0], th[1]) / chord(th[0], th[2]);
      Real after = chord(im[0], im[1]) / chord(im[0], im[2]);
      Real q = after / before;
      out.worst = std::max(out.worst, std::max(q, 1 / q));
      ++out.samples;
    }
  }
  out.pass = out.worst <= out.C;
  return out;
}

}  // namespace cusp
