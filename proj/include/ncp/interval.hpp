#pragma once

#include <limits>
#include <vector>

namespace ncp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed interval [lo, hi]; lo <= hi enforced at construction. Emptiness is
// never represented by an inverted interval; callers use std::optional or
// PredictionSet::empty_set().
struct Interval {
  double lo;
  double hi;

  Interval(double lo_, double hi_);

  double width() const { return hi - lo; }
  bool contains(double y) const { return lo <= y && y <= hi; }
  bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

// Finite union of disjoint closed intervals, or the empty set, or all of R.
// Union pieces are sorted by lo and merged (touching endpoints coalesce), so
// construction is idempotent.
class PredictionSet {
 public:
  enum class Kind { Empty, FullLine, Union };

  static PredictionSet empty_set() { return PredictionSet(Kind::Empty, {}); }
  static PredictionSet full_line() { return PredictionSet(Kind::FullLine, {}); }
  static PredictionSet from_pieces(std::vector<Interval> pieces);

  Kind kind() const { return kind_; }
  const std::vector<Interval>& pieces() const { return pieces_; }

  // Lebesgue measure: 0 for Empty, +inf for FullLine, sum of lengths otherwise.
  double width() const;
  bool contains(double y) const;
  bool is_empty() const { return kind_ == Kind::Empty; }
  bool is_full_line() const { return kind_ == Kind::FullLine; }

  // Smallest interval containing the set.
  PredictionSet convex_hull() const;

  bool operator==(const PredictionSet& o) const {
    return kind_ == o.kind_ && pieces_ == o.pieces_;
  }

 private:
  PredictionSet(Kind k, std::vector<Interval> p) : kind_(k), pieces_(std::move(p)) {}

  Kind kind_;
  std::vector<Interval> pieces_;
};

}  // namespace ncp
