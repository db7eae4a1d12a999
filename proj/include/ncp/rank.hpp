#pragma once

#include <optional>
#include <vector>

namespace ncp {

// Integer rank helpers tolerant of floating-point noise at integer
// boundaries (alpha*(n+1) style products land within 1e-9 of an integer
// only when the exact value is that integer for the alpha grids in use).
long ceil_rank(double v);
long floor_rank(double v);

// k-th smallest score with k = ceil((1-alpha)(m+1)), m = |scores|.
// Multiset semantics (ties kept). Returns +inf when k > m (caller takes the
// family's full limit); -inf when k < 1 (alpha = 1 edge). Throws on empty
// input with message "no calibration scores".
double conformal_quantile(std::vector<double> scores, double alpha);

// floor(alpha*(n+1))-th smallest of `values` (the surviving lower endpoints;
// n is the full training count, not |values|). nullopt signals an empty
// prediction set (rank exceeds the available values); rank 0 yields -inf so
// the lower end is unconstrained.
std::optional<double> rank_low(std::vector<double> values, double alpha, long n);

// ceil((1-alpha)(n+1))-th smallest of `values`; +inf when the rank exceeds
// the available count.
double rank_high(std::vector<double> values, double alpha, long n);

}  // namespace ncp
