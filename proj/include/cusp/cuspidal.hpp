#pragma once

#include <string>
#include <vector>

#include "cusp/domain.hpp"
#include "cusp/errors.hpp"
#include "cusp/expansion.hpp"
#include "cusp/moebius.hpp"

namespace cusp {

enum class CuspKind { no, left, right, both };

inline const char* cusp_kind_name(CuspKind k) {
  switch (k) {
    case CuspKind::no: return "no";
    case CuspKind::left: return "left";
    case CuspKind::right: return "right";
    case CuspKind::both: return "both";
  }
  return "?";
}

/// Endpoint identities g_{a_k}(xi^l_{a_{k+1}}) = xi^l_{a_k} (left) or the
/// same with right endpoints, read from the domain's link tables.
inline CuspKind is_cuspidal(const IdealPolygonDomain& D, const Word& w) {
  if (w.empty() || !admissible(w)) throw Error(ErrorCode::InadmissibleWord, "bad word");
  if (w.size() == 1) return CuspKind::both;
  bool left = true, right = true;
  for (size_t k = 0; k + 1 < w.size() && (left || right); ++k) {
    left = left && D.lnk(w[k], w[k + 1]);
    right = right && D.rnk(w[k], w[k + 1]);
  }
  return left ? CuspKind::left : (right ? CuspKind::right : CuspKind::no);
}

/// Nested arcs A[a_0], A[a_0 a_1], ... all share their left (or right) end.
inline CuspKind is_cuspidal_geometric(const IdealPolygonDomain& D, const Word& w,
                                      Real tol = Real(1e-20)) {
  if (w.empty() || !admissible(w)) throw Error(ErrorCode::InadmissibleWord, "bad word");
  if (w.size() == 1) return CuspKind::both;
  const Arc first = D.arc(w[0]);
  bool left = true, right = true;
  MoebiusMap G;
  for (size_t n = 1; n < w.size(); ++n) {
    G = compose(G, D.g(w[n - 1]));
    Arc a = image_arc(D, G, w[n]);
    left = left && angle_gap(a.left.angle.value, first.left.angle.value) <= tol;
    right = right && angle_gap(a.right.angle.value, first.right.angle.value) <= tol;
  }
  return left ? CuspKind::left : (right ? CuspKind::right : CuspKind::no);
}

/// The unique letter continuing a left (right) cuspidal word ending in a.
inline Letter left_next(const IdealPolygonDomain& D, Letter a) {
  for (int i = 0; i < D.size(); ++i)
    if (D.lnk(a, Letter::from_id(i))) return Letter::from_id(i);
  throw Error(ErrorCode::InvalidDomain, "no left continuation for " + D.name(a));
}
inline Letter right_next(const IdealPolygonDomain& D, Letter a) {
  for (int i = 0; i < D.size(); ++i)
    if (D.rnk(a, Letter::from_id(i))) return Letter::from_id(i);
  throw Error(ErrorCode::InvalidDomain, "no right continuation for " + D.name(a));
}

enum class Side { left, right };

struct ParabolicWordRecord {
  Word word;
  DiskPoint fixed_point;
  ExtendedReal fixed_x;
  MoebiusMap element;
  Side side;
};

/// Minimal cuspidal cycle starting at a on the given side.
inline Word parabolic_cycle(const IdealPolygonDomain& D, Letter a, Side side) {
  Word w{a};
  Letter cur = a;
  for (int k = 0; k <= D.size(); ++k) {
    Letter nx = side == Side::left ? left_next(D, cur) : right_next(D, cur);
    if (nx == a) return w;
    w.push_back(nx);
    cur = nx;
  }
  throw Error(ErrorCode::InvalidDomain, "cuspidal continuation does not cycle");
}

/// Every left and right parabolic word, one per starting letter and side.
/// Each record's element fixes xi^l_{a_0} (left) or xi^r_{a_0} (right).
inline std::vector<ParabolicWordRecord> parabolic_words(const IdealPolygonDomain& D) {
  std::vector<ParabolicWordRecord> out;
  for (Side side : {Side::left, Side::right})
    for (int i = 0; i < D.size(); ++i) {
      Letter a = Letter::from_id(i);
      ParabolicWordRecord r;
      r.word = parabolic_cycle(D, a, side);
      r.side = side;
      r.element = word_map(D, r.word);
      const Arc& arc = D.arc(a);
      r.fixed_point = side == Side::left ? arc.left : arc.right;
      r.fixed_x = side == Side::left ? arc.xl : arc.xr;
      out.push_back(r);
    }
  return out;
}

// ---------------------------------------------------------------- decomposition

enum class BlockKind { left, right, single };

inline const char* block_kind_name(BlockKind k) {
  return k == BlockKind::left ? "left" : (k == BlockKind::right ? "right" : "single-letter");
}

struct CuspidalBlock {
  Word word;
  long start = 0;
  BlockKind kind = BlockKind::single;
};

/// Parabolic word whose periodic repetition produces the block.
inline Word parabolic_base(const IdealPolygonDomain& D, const CuspidalBlock& b) {
  return parabolic_cycle(D, b.word.front(), b.kind == BlockKind::right ? Side::right : Side::left);
}

namespace detail {

using LetterAt = std::function<Letter(long)>;

/// Maximal block starting at s, reading forward.
inline CuspidalBlock block_forward(const IdealPolygonDomain& D, const LetterAt& at, long s,
                                   long cap, std::optional<long> end = std::nullopt) {
  CuspidalBlock b;
  b.start = s;
  b.word.push_back(at(s));
  int side = 0;  // 1 left, 2 right
  for (long j = s + 1; !end || j < *end; ++j) {
    Letter prev = b.word.back(), cur = at(j);
    if (cur == prev.inv()) throw IndexedError(ErrorCode::InadmissibleWord, j, "backtracking");
    if (side != 2 && D.lnk(prev, cur)) side = 1;
    else if (side != 1 && D.rnk(prev, cur)) side = 2;
    else break;
    b.word.push_back(cur);
    if ((long)b.word.size() > cap)
      throw IndexedError(ErrorCode::EventuallyCuspidal, j, "cuspidal run exceeds cap");
  }
  b.kind = side == 1 ? BlockKind::left : (side == 2 ? BlockKind::right : BlockKind::single);
  return b;
}

/// Earliest start of a cuspidal word ending at position e.
inline long extend_left(const IdealPolygonDomain& D, const LetterAt& at, long e, long cap) {
  int side = 0;
  long s = e;
  while (true) {
    Letter prev = at(s - 1), cur = at(s);
    if (side != 2 && D.lnk(prev, cur)) side = 1;
    else if (side != 1 && D.rnk(prev, cur)) side = 2;
    else break;
    --s;
    if (e - s + 1 > cap)
      throw IndexedError(ErrorCode::EventuallyCuspidal, s, "cuspidal run exceeds cap");
  }
  return s;
}

}  // namespace detail

inline long default_run_cap(const IdealPolygonDomain& D, int N) {
  size_t maxlen = 1;
  for (const auto& r : parabolic_words(D)) maxlen = std::max(maxlen, r.word.size());
  return 10L * (long)maxlen * std::max(N, 1);
}

/// Blocks C_r for r in [r_lo, r_hi] of a one-sided stream (n(0) = 0).
inline std::vector<CuspidalBlock> cuspidal_decomposition(const IdealPolygonDomain& D,
                                                         const LetterStream& s, long r_lo,
                                                         long r_hi, long cap = 1000) {
  auto len = s.length();
  detail::LetterAt at = [&](long i) { return s.at(D, i); };
  std::vector<CuspidalBlock> out;
  long pos = 0;
  for (long r = 0; r <= r_hi; ++r) {
    if (len && pos >= *len) break;
    auto b = detail::block_forward(D, at, pos, cap, len);
    pos += (long)b.word.size();
    if (r >= r_lo) out.push_back(std::move(b));
  }
  return out;
}

/// Finite word version.
inline std::vector<CuspidalBlock> cuspidal_decomposition(const IdealPolygonDomain& D,
                                                         const Word& w, long cap = 1000) {
  return cuspidal_decomposition(D, LetterStream::explicit_word(w), 0, (long)w.size(), cap);
}

/// Blocks of a bi-infinite word; C_0 is the maximal cuspidal word containing a_0.
inline std::vector<CuspidalBlock> cuspidal_decomposition(const IdealPolygonDomain& D,
                                                         const BiInfiniteWordSpec& w, long r_lo,
                                                         long r_hi, long cap = 1000) {
  detail::LetterAt at = [&](long i) { return w.letter(D, i); };
  std::vector<CuspidalBlock> fwd, back;
  long n0 = detail::extend_left(D, at, 0, cap);
  long pos = n0;
  for (long r = 0; r <= r_hi; ++r) {
    auto b = detail::block_forward(D, at, pos, cap);
    pos += (long)b.word.size();
    if (r >= r_lo) fwd.push_back(std::move(b));
  }
  long end = n0 - 1;
  for (long r = -1; r >= r_lo; --r) {
    long s = detail::extend_left(D, at, end, cap);
    if (r <= r_hi) {
      CuspidalBlock b = detail::block_forward(D, at, s, cap, end + 1);
      back.push_back(std::move(b));
    }
    end = s - 1;
  }
  std::vector<CuspidalBlock> out(back.rbegin(), back.rend());
  out.insert(out.end(), fwd.begin(), fwd.end());
  return out;
}

}  // namespace cusp
