#include "ncp/interval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ncp {

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (std::isnan(lo) || std::isnan(hi)) throw std::invalid_argument("interval endpoint is NaN");
  if (lo > hi) throw std::invalid_argument("interval with lo > hi");
}

PredictionSet PredictionSet::from_pieces(std::vector<Interval> pieces) {
  if (pieces.empty()) return empty_set();
  std::sort(pieces.begin(), pieces.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });
  std::vector<Interval> merged;
  merged.reserve(pieces.size());
  merged.push_back(pieces.front());
  for (std::size_t i = 1; i < pieces.size(); ++i) {
    Interval& last = merged.back();
    if (pieces[i].lo <= last.hi) {
      last.hi = std::max(last.hi, pieces[i].hi);
    } else {
      merged.push_back(pieces[i]);
    }
  }
  if (merged.size() == 1 && merged.front().lo == -kInf && merged.front().hi == kInf) {
    return full_line();
  }
  return PredictionSet(Kind::Union, std::move(merged));
}

double PredictionSet::width() const {
  switch (kind_) {
    case Kind::Empty:
      return 0.0;
    case Kind::FullLine:
      return kInf;
    case Kind::Union: {
      double w = 0.0;
      for (const Interval& p : pieces_) w += p.width();
      return w;
    }
  }
  return 0.0;
}

bool PredictionSet::contains(double y) const {
  switch (kind_) {
    case Kind::Empty:
      return false;
    case Kind::FullLine:
      return true;
    case Kind::Union: {
      // pieces are sorted and disjoint
      auto it = std::upper_bound(pieces_.begin(), pieces_.end(), y,
                                 [](double v, const Interval& p) { return v < p.lo; });
      if (it == pieces_.begin()) return false;
      --it;
      return it->contains(y);
    }
  }
  return false;
}

PredictionSet PredictionSet::convex_hull() const {
  if (kind_ != Kind::Union) return *this;
  Interval hull(pieces_.front().lo, pieces_.back().hi);
  return from_pieces({hull});
}

}  // namespace ncp
