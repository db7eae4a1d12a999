#include "ncp/rank.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ncp/interval.hpp"

namespace ncp {

namespace {
constexpr double kRankGuard = 1e-9;

// k-th smallest, 1-indexed; k must be within [1, size].
double kth_smallest(std::vector<double>& v, long k) {
  auto nth = v.begin() + (k - 1);
  std::nth_element(v.begin(), nth, v.end());
  return *nth;
}
}  // namespace

long ceil_rank(double v) { return static_cast<long>(std::ceil(v - kRankGuard)); }

long floor_rank(double v) { return static_cast<long>(std::floor(v + kRankGuard)); }

double conformal_quantile(std::vector<double> scores, double alpha) {
  if (scores.empty()) throw std::invalid_argument("no calibration scores");
  const long m = static_cast<long>(scores.size());
  const long k = ceil_rank((1.0 - alpha) * static_cast<double>(m + 1));
  if (k > m) return kInf;
  if (k < 1) return -kInf;
  return kth_smallest(scores, k);
}

std::optional<double> rank_low(std::vector<double> values, double alpha, long n) {
  const long k = floor_rank(alpha * static_cast<double>(n + 1));
  if (k < 1) return -kInf;
  if (k > static_cast<long>(values.size())) return std::nullopt;
  return kth_smallest(values, k);
}

double rank_high(std::vector<double> values, double alpha, long n) {
  const long k = ceil_rank((1.0 - alpha) * static_cast<double>(n + 1));
  if (k < 1) return -kInf;
  if (k > static_cast<long>(values.size())) return kInf;
  return kth_smallest(values, k);
}

}  // namespace ncp
