#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "subspectra/types.hpp"

namespace subspectra {

// Finite union of real intervals with explicit endpoint openness.
//
// Spectral selectors need exact endpoint semantics: whether an atom sitting
// precisely on a cut belongs to a region must be a reproducible yes/no, so
// regions are represented structurally instead of by predicates with
// tolerances.  Sets normalize on construction to a sorted list of pairwise
// disjoint, non-mergeable pieces, so structurally equal sets compare equal.
template <typename Real>
class BorelSet {
 public:
  struct Interval {
    Real lo;
    Real hi;
    bool lo_closed;
    bool hi_closed;
  };

  BorelSet() = default;  // the empty set

  static BorelSet empty() { return BorelSet(); }

  static BorelSet all() {
    return BorelSet({{-std::numeric_limits<Real>::infinity(),
                      std::numeric_limits<Real>::infinity(), false, false}});
  }

  static BorelSet point(Real x) { return interval(x, x, true, true); }

  static BorelSet interval(Real lo, Real hi, bool lo_closed = true, bool hi_closed = true) {
    return BorelSet({{lo, hi, lo_closed, hi_closed}});
  }

  // (-inf, t) or (-inf, t]
  static BorelSet below(Real t, bool closed = false) {
    return BorelSet({{-std::numeric_limits<Real>::infinity(), t, false, closed}});
  }

  // (t, +inf) or [t, +inf)
  static BorelSet above(Real t, bool closed = false) {
    return BorelSet({{t, std::numeric_limits<Real>::infinity(), closed, false}});
  }

  static BorelSet unite(const BorelSet& x, const BorelSet& y) {
    std::vector<Interval> pieces = x.pieces_;
    pieces.insert(pieces.end(), y.pieces_.begin(), y.pieces_.end());
    return BorelSet(std::move(pieces));
  }

  bool is_empty() const { return pieces_.empty(); }

  const std::vector<Interval>& pieces() const { return pieces_; }

  bool contains(Real x) const {
    for (const Interval& p : pieces_) {
      const bool above_lo = x > p.lo || (x == p.lo && p.lo_closed);
      const bool below_hi = x < p.hi || (x == p.hi && p.hi_closed);
      if (above_lo && below_hi) return true;
    }
    return false;
  }

  friend bool operator==(const BorelSet& x, const BorelSet& y) {
    if (x.pieces_.size() != y.pieces_.size()) return false;
    for (std::size_t k = 0; k < x.pieces_.size(); ++k) {
      const Interval &p = x.pieces_[k], &q = y.pieces_[k];
      if (p.lo != q.lo || p.hi != q.hi || p.lo_closed != q.lo_closed ||
          p.hi_closed != q.hi_closed)
        return false;
    }
    return true;
  }

 private:
  explicit BorelSet(std::vector<Interval> pieces) : pieces_(std::move(pieces)) {
    normalize();
  }

  void normalize() {
    constexpr Real inf = std::numeric_limits<Real>::infinity();
    for (Interval& p : pieces_) {
      if (std::isnan(p.lo) || std::isnan(p.hi))
        throw InvalidSpec("BorelSet: NaN endpoint");
      if (p.lo > p.hi) throw InvalidSpec("BorelSet: interval with lo > hi");
      if (p.lo == -inf) p.lo_closed = false;  // infinity is never attained
      if (p.hi == inf) p.hi_closed = false;
    }
    // Drop degenerate empty pieces such as (a, a] before sorting.
    std::erase_if(pieces_, [](const Interval& p) {
      return p.lo == p.hi && !(p.lo_closed && p.hi_closed);
    });
    std::sort(pieces_.begin(), pieces_.end(), [](const Interval& p, const Interval& q) {
      if (p.lo != q.lo) return p.lo < q.lo;
      return p.lo_closed && !q.lo_closed;  // closed start first
    });
    std::vector<Interval> merged;
    for (const Interval& p : pieces_) {
      if (!merged.empty()) {
        Interval& cur = merged.back();
        const bool overlaps =
            p.lo < cur.hi || (p.lo == cur.hi && (p.lo_closed || cur.hi_closed));
        if (overlaps) {
          if (p.hi > cur.hi || (p.hi == cur.hi && p.hi_closed)) {
            cur.hi = p.hi;
            cur.hi_closed = p.hi_closed;
          }
          continue;
        }
      }
      merged.push_back(p);
    }
    pieces_ = std::move(merged);
  }

  std::vector<Interval> pieces_;
};

}  // namespace subspectra
