#pragma once

#include <span>
#include <vector>

#include "ncp/interval.hpp"

namespace ncp {

// One calibration interval with its vote weight. The swept set is
// {y : sum of weights of entries containing y > threshold}.
struct SweepEntry {
  Interval interval;
  double weight;
};

// Unweighted cross-conformal threshold: count condition
// alpha*(n+1) - 1 < #{i : y in [l_i, u_i]}.
inline double unweighted_threshold(double alpha, long n) {
  return alpha * static_cast<double>(n + 1) - 1.0;
}

// Endpoint sweep over closed intervals. Exact for the weighted stabbing
// condition; left endpoints are processed before right endpoints at equal
// values so closed-interval overlap at a single point is counted. Returns
// the full line when threshold < 0 (uncovered points already qualify).
// O(E log E).
PredictionSet sweep_union(std::span<const SweepEntry> entries, double threshold);

}  // namespace ncp
