#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cusp/domain.hpp"
#include "cusp/errors.hpp"
#include "cusp/moebius.hpp"

namespace cusp {

// Floor for endpoint ties, a few dozen ulps of the angle. Arcs add their own
// endpoint errors on top.
inline Real kTieTolerance() { return 64 * eps(); }

/// Product g_{a_0} ... g_{a_{n-1}}.
inline MoebiusMap word_map(const IdealPolygonDomain& D, const Word& w, size_t n) {
  MoebiusMap G;
  for (size_t i = 0; i < n && i < w.size(); ++i) G = compose(G, D.g(w[i]));
  return G;
}
inline MoebiusMap word_map(const IdealPolygonDomain& D, const Word& w) {
  return word_map(D, w, w.size());
}

/// Image of the side arc of `last` under G.
inline Arc image_arc(const IdealPolygonDomain& D, const MoebiusMap& G, Letter last) {
  const Arc& a = D.arc(last);
  return Arc::from_x(apply(G, a.xl), apply(G, a.xr));
}

/// Level-n arc A[a_0, ..., a_n] = g_{a_0} ... g_{a_{n-1}} A[a_n].
inline Arc arc_of_word(const IdealPolygonDomain& D, const Word& w) {
  if (w.empty()) throw Error(ErrorCode::InadmissibleWord, "empty word");
  if (!admissible(w)) throw Error(ErrorCode::InadmissibleWord, "backtracking word");
  return image_arc(D, word_map(D, w, w.size() - 1), w.back());
}

// ---------------------------------------------------------------- streams

class LetterStream;
Word expand(const IdealPolygonDomain& D, const DiskPoint& xi, int depth);

/// Finite or lazily generated letter sequence. Letters are pulled by index.
class LetterStream {
 public:
  enum class Kind { Periodic, FromPoint, Explicit, Generator };
  using Fn = std::function<Letter(long)>;

  static LetterStream periodic(Word pre, Word period) {
    if (period.empty()) throw Error(ErrorCode::InadmissibleWord, "empty period");
    Word chk = pre;
    chk.insert(chk.end(), period.begin(), period.end());
    chk.insert(chk.end(), period.begin(), period.end());
    if (!admissible(chk))
      throw Error(ErrorCode::InadmissibleWord, "periodic stream backtracks");
    LetterStream s(Kind::Periodic);
    s.pre_ = std::move(pre);
    s.period_ = std::move(period);
    return s;
  }
  static LetterStream from_point(DiskPoint xi) {
    LetterStream s(Kind::FromPoint);
    s.point_ = xi;
    return s;
  }
  static LetterStream explicit_word(Word w) {
    if (!admissible(w)) throw Error(ErrorCode::InadmissibleWord, "backtracking word");
    LetterStream s(Kind::Explicit);
    s.pre_ = std::move(w);
    return s;
  }
  static LetterStream generator(Fn f) {
    LetterStream s(Kind::Generator);
    s.fn_ = std::make_shared<Fn>(std::move(f));
    return s;
  }

  Kind kind() const { return kind_; }
  const Word& preperiod() const { return pre_; }
  const Word& period() const { return period_; }
  const DiskPoint& point() const { return point_; }
  bool is_barred() const { return barred_; }

  /// Number of letters, when finite.
  std::optional<long> length() const {
    if (kind_ == Kind::Explicit) return (long)pre_.size();
    return std::nullopt;
  }

  /// Letterwise bar of the stream.
  LetterStream barred() const {
    LetterStream s = *this;
    s.barred_ = !barred_;
    return s;
  }

  /// Letter i. Explicit streams raise past their end.
  Letter at(const IdealPolygonDomain& D, long i) const {
    Letter l;
    switch (kind_) {
      case Kind::Periodic:
        l = i < (long)pre_.size() ? pre_[i]
                                  : period_[(i - pre_.size()) % period_.size()];
        break;
      case Kind::Explicit:
        if (i >= (long)pre_.size())
          throw IndexedError(ErrorCode::InadmissibleWord, i, "explicit stream exhausted");
        l = pre_[i];
        break;
      case Kind::Generator:
        l = (*fn_)(i);
        break;
      case Kind::FromPoint:
        l = expand(D, point_, (int)i + 1).back();
        break;
    }
    return barred_ ? l.inv() : l;
  }

  /// First n letters.
  Word prefix(const IdealPolygonDomain& D, long n) const {
    Word w;
    if (kind_ == Kind::FromPoint) {
      w = expand(D, point_, (int)n);
      if (barred_) w = bar_word(w);
      return w;
    }
    w.reserve(n);
    for (long i = 0; i < n; ++i) w.push_back(at(D, i));
    return w;
  }

  /// Sequential reader; FromPoint streams are expanded in doubling chunks.
  class Cursor {
   public:
    Cursor(const IdealPolygonDomain& D, const LetterStream& s) : D_(D), s_(s) {}
    std::optional<Letter> next() {
      if (auto n = s_.length(); n && i_ >= *n) return std::nullopt;
      Letter l;
      if (s_.kind_ == Kind::FromPoint) {
        if (i_ >= (long)cache_.size()) cache_ = s_.prefix(D_, std::max<long>(16, 2 * i_ + 2));
        l = cache_[i_];
      } else {
        l = s_.at(D_, i_);
      }
      ++i_;
      return l;
    }
    long index() const { return i_; }

   private:
    const IdealPolygonDomain& D_;
    const LetterStream& s_;
    long i_ = 0;
    Word cache_;
  };

 private:
  explicit LetterStream(Kind k) : kind_(k) {}
  Kind kind_;
  Word pre_, period_;
  DiskPoint point_;
  std::shared_ptr<Fn> fn_;
  bool barred_ = false;
};

/// Text form: "w" for an explicit word or "pre | period" for a periodic one.
inline LetterStream parse_stream(const IdealPolygonDomain& D, const std::string& text) {
  auto bar = text.find('|');
  if (bar == std::string::npos) return LetterStream::explicit_word(parse_word(D, text));
  return LetterStream::periodic(parse_word(D, text.substr(0, bar)),
                                parse_word(D, text.substr(bar + 1)));
}

inline std::string stream_to_string(const IdealPolygonDomain& D, const LetterStream& s) {
  auto bw = [&](const Word& w) { return word_to_string(D, s.is_barred() ? bar_word(w) : w); };
  switch (s.kind()) {
    case LetterStream::Kind::Periodic: return bw(s.preperiod()) + " | " + bw(s.period());
    case LetterStream::Kind::Explicit: return bw(s.preperiod());
    case LetterStream::Kind::FromPoint:
      return "point(" + to_decimal(s.point().angle.value) + ")";
    case LetterStream::Kind::Generator: return "generator";
  }
  return "";
}

/// Bi-infinite word. `negative` lists a_{-1}, a_{-2}, ... (plain letters).
struct BiInfiniteWordSpec {
  LetterStream negative;
  LetterStream nonnegative;

  Letter letter(const IdealPolygonDomain& D, long j) const {
    return j >= 0 ? nonnegative.at(D, j) : negative.at(D, -j - 1);
  }
  /// a_j, a_{j+1}, ...
  LetterStream forward_from(const IdealPolygonDomain& D, long j) const {
    const BiInfiniteWordSpec self = *this;
    const IdealPolygonDomain* dp = &D;
    return LetterStream::generator([self, dp, j](long i) { return self.letter(*dp, j + i); });
  }
  /// a_{j-1}, a_{j-2}, ...
  LetterStream backward_from(const IdealPolygonDomain& D, long j) const {
    const BiInfiniteWordSpec self = *this;
    const IdealPolygonDomain* dp = &D;
    return LetterStream::generator(
        [self, dp, j](long i) { return self.letter(*dp, j - 1 - i); });
  }
};

// ---------------------------------------------------------------- Bowen-Series map

inline bool near_any_vertex(const IdealPolygonDomain& D, const Real& t, const Real& tol) {
  for (const auto& v : D.vertices)
    if (angle_gap(v.angle.value, t) <= tol) return true;
  return false;
}

/// One step of the Bowen-Series map: the side containing xi and g^-1(xi).
inline std::pair<Letter, DiskPoint> bs_step(const IdealPolygonDomain& D, const DiskPoint& xi) {
  const Real& t = xi.angle.value;
  Real tol = std::max(xi.angle.err, kTieTolerance());
  if (near_any_vertex(D, t, tol))
    throw IndexedError(ErrorCode::CuspidalBoundary, 0, "point on a side endpoint");
  for (int i = 0; i < D.size(); ++i) {
    Letter a = Letter::from_id(i);
    if (!D.arc(a).contains(t)) continue;
    ExtendedReal x = inv_cayley(xi);
    DiskPoint img = cayley(apply(D.g(a.inv()), x));
    return {a, img};
  }
  throw Error(ErrorCode::InvalidDomain, "arcs do not cover the circle");
}

/// Children of the level-n arc of a word ending in `last`, as letters in
/// clockwise order.
inline std::vector<Letter> children_cw(const IdealPolygonDomain& D, Letter last) {
  std::vector<Letter> out;
  Letter s = D.succ(last.inv());
  for (int k = 0; k < D.size() - 1; ++k) {
    out.push_back(s);
    s = D.succ(s);
  }
  return out;
}

/// Itinerary of xi by nested-arc containment. Equivalent to iterating
/// bs_step but without the exponential loss of precision.
inline Word expand(const IdealPolygonDomain& D, const DiskPoint& xi, int depth) {
  if (depth < 1) throw Error(ErrorCode::PreconditionFailed, "depth must be at least 1");
  const Real& t = xi.angle.value;
  const Real base = std::max(xi.angle.err, kTieTolerance());
  Word w;
  MoebiusMap G;
  for (int n = 0; n < depth; ++n) {
    bool found = false;
    for (int i = 0; i < D.size() && !found; ++i) {
      Letter b = Letter::from_id(i);
      if (!w.empty() && b == w.back().inv()) continue;
      Arc arc = image_arc(D, G, b);
      Real off = cw_distance(arc.left.angle.value, t);
      Real len = arc.length();
      const Real tol = std::max(base, arc.left.angle.err + arc.right.angle.err);
      if (off > len + tol && off < two_pi() - tol) continue;
      if (off <= tol || off >= two_pi() - tol || abs(off - len) <= tol)
        throw IndexedError(ErrorCode::CuspidalBoundary, n, "point on an arc endpoint");
      w.push_back(b);
      if (n + 1 < depth) G = compose(G, D.g(b));
      found = true;
    }
    if (!found) throw IndexedError(ErrorCode::CuspidalBoundary, n, "point between arcs");
  }
  return w;
}

struct PointEstimate {
  DiskPoint point;
  RealScalar err;
};

/// Midpoint of the depth-level arc; err is half its length.
inline PointEstimate point_of_stream(const IdealPolygonDomain& D, const LetterStream& s,
                                     int depth) {
  Word w = s.prefix(D, depth + 1);
  Arc arc = arc_of_word(D, w);
  Real half = arc.length() / 2;
  Real e = half + arc.left.angle.err + arc.right.angle.err;
  return {DiskPoint(arc.left.angle.value - half, e), RealScalar(e)};
}

struct EndpointEstimate {
  ExtendedReal value;
  Real err = 0;
  int depth = 0;
};

/// Boundary-coordinate interval of a finite arc (not containing xi_0).
inline bool finite_interval(const Arc& arc, Real& lo, Real& hi) {
  if (arc.xl.is_inf() || arc.xr.is_inf()) return false;
  if (arc.contains(0)) return false;
  hi = arc.xl.value() + arc.xl.err();
  lo = arc.xr.value() - arc.xr.err();
  return lo <= hi;
}

/// Endpoint from a fixed depth: midpoint of the arc's coordinate interval.
inline EndpointEstimate endpoint_forward(const IdealPolygonDomain& D, const LetterStream& s,
                                         int depth) {
  Word w = s.prefix(D, depth + 1);
  Arc arc = arc_of_word(D, w);
  Real lo, hi;
  if (!finite_interval(arc, lo, hi))
    throw IndexedError(ErrorCode::PoleProximity, depth, "arc reaches the cusp at infinity");
  return {ExtendedReal((lo + hi) / 2, (hi - lo) / 2), (hi - lo) / 2, depth};
}

inline EndpointEstimate endpoint_backward(const IdealPolygonDomain& D, const LetterStream& s,
                                          int depth) {
  return endpoint_forward(D, s.barred(), depth);
}

/// Endpoint refined letter by letter until err <= tol or max_depth letters.
inline EndpointEstimate endpoint_forward_tol(const IdealPolygonDomain& D, const LetterStream& s,
                                             Real tol, int max_depth = 400) {
  LetterStream::Cursor cur(D, s);
  MoebiusMap G;
  std::optional<Letter> prev;
  EndpointEstimate best;
  bool have = false;
  for (int n = 0; n < max_depth; ++n) {
    auto l = cur.next();
    if (!l) break;
    if (prev && *l == prev->inv())
      throw IndexedError(ErrorCode::InadmissibleWord, n, "backtracking stream");
    Arc arc = image_arc(D, G, *l);
    Real lo, hi;
    if (finite_interval(arc, lo, hi)) {
      best = {ExtendedReal((lo + hi) / 2, (hi - lo) / 2), (hi - lo) / 2, n};
      have = true;
      if (best.err <= tol) return best;
    }
    G = compose(G, D.g(*l));
    prev = l;
  }
  if (!have)
    throw IndexedError(ErrorCode::PoleProximity, max_depth, "arc reaches the cusp at infinity");
  return best;
}

inline EndpointEstimate endpoint_backward_tol(const IdealPolygonDomain& D, const LetterStream& s,
                                              Real tol, int max_depth = 400) {
  return endpoint_forward_tol(D, s.barred(), tol, max_depth);
}

/// Geodesic with endpoints x_j = [a_{j-1}, a_{j-2}, ...]^- and y_j = [a_j, ...].
struct NormalizedGeodesic {
  GeodesicH geodesic;
  Real err_backward = 0, err_forward = 0;
};

inline NormalizedGeodesic normalized_geodesic(const IdealPolygonDomain& D,
                                              const BiInfiniteWordSpec& w, long j,
                                              Real tol = Real(1e-25), int max_depth = 400) {
  auto y = endpoint_forward_tol(D, w.forward_from(D, j), tol, max_depth);
  auto x = endpoint_backward_tol(D, w.backward_from(D, j), tol, max_depth);
  return {{x.value, y.value}, x.err, y.err};
}

/// Cutting sequence letters a_j for j in [j_min, j_max].
inline Word cutting_sequence(const IdealPolygonDomain& D, const GeodesicH& g, long j_min,
                             long j_max) {
  if (g.backward.is_inf() || g.forward.is_inf())
    throw Error(ErrorCode::DoesNotMeetDomain, "endpoint at the cusp at infinity");
  DiskPoint px = cayley(g.backward), py = cayley(g.forward);
  for (int i = 0; i < D.size(); ++i) {
    const Arc& a = D.arcs[i];
    if (a.contains(px.angle.value) && a.contains(py.angle.value))
      throw Error(ErrorCode::DoesNotMeetDomain, "both endpoints behind side " + D.names[i]);
  }
  Word out;
  if (j_min < 0) {
    Word back = bar_word(expand(D, px, (int)(-j_min)));  // a_{-1}, a_{-2}, ...
    for (long j = j_min; j < 0 && j <= j_max; ++j) out.push_back(back[-j - 1]);
  }
  if (j_max >= 0) {
    Word fwd = expand(D, py, (int)(j_max + 1));
    for (long j = std::max(0L, j_min); j <= j_max; ++j) out.push_back(fwd[j]);
  }
  if (!admissible(out)) throw Error(ErrorCode::DoesNotMeetDomain, "code backtracks at junction");
  return out;
}

}  // namespace cusp
