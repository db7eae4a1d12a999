#include "ncp/families.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ncp {

namespace family_forms {

namespace {
std::optional<Interval> make_or_empty(double lo, double hi) {
  if (lo > hi) return std::nullopt;
  return Interval(lo, hi);
}
}  // namespace

double mean_symmetric_score(double mu, double y) { return std::abs(y - mu); }

std::optional<Interval> mean_symmetric_interval(double mu, double t) {
  t = std::max(t, 0.0);  // domain [0, inf)
  return Interval(mu - t, mu + t);
}

double mean_scaled_score(double mu, double sigma, double y) { return std::abs(y - mu) / sigma; }

std::optional<Interval> mean_scaled_interval(double mu, double sigma, double t) {
  t = std::max(t, 0.0);
  return Interval(mu - t * sigma, mu + t * sigma);
}

double cqr_score(double q_lo, double q_hi, double y) {
  return std::max(q_lo - y, y - q_hi);
}

std::optional<Interval> cqr_interval(double q_lo, double q_hi, double t) {
  return make_or_empty(q_lo - t, q_hi + t);
}

double cqr_m_score(double q_lo, double q_hi, double d_lo, double d_hi, double y) {
  return std::max((q_lo - y) / d_lo, (y - q_hi) / d_hi);
}

std::optional<Interval> cqr_m_interval(double q_lo, double q_hi, double d_lo, double d_hi, double t) {
  return make_or_empty(q_lo - t * d_lo, q_hi + t * d_hi);
}

double cqr_r_score(double q_lo, double q_hi, double s, double y) {
  return std::max(std::max(q_lo - y, y - q_hi) / s, -0.5);
}

std::optional<Interval> cqr_r_interval(double q_lo, double q_hi, double s, double t) {
  t = std::max(t, -0.5);  // domain (-1/2, inf); the boundary set is a point
  return make_or_empty(q_lo - t * s, q_hi + t * s);
}

double grid_quantile(const QuantileGrid& g, double level) {
  level = std::clamp(level, 0.01, 0.99);
  double pos = (level - 0.01) * 100.0;
  int idx = std::min(static_cast<int>(pos), 97);
  double frac = pos - idx;
  return g[idx] + frac * (g[idx + 1] - g[idx]);
}

double grid_cdf_upper(const QuantileGrid& g, double y) {
  if (y < g.front()) return 0.01;
  if (y >= g.back()) return 0.99;
  // last j with g[j] <= y; then g[j] <= y < g[j+1] so the segment is strictly
  // increasing and the linear inverse is well defined
  int j = static_cast<int>(std::upper_bound(g.begin(), g.end(), y) - g.begin()) - 1;
  return 0.01 * (j + 1) + 0.01 * (y - g[j]) / (g[j + 1] - g[j]);
}

double grid_cdf_lower(const QuantileGrid& g, double y) {
  if (y <= g.front()) return 0.01;
  if (y > g.back()) return 0.99;
  // first j with g[j] >= y; then g[j-1] < y <= g[j]
  int j = static_cast<int>(std::lower_bound(g.begin(), g.end(), y) - g.begin());
  if (j == 0) return 0.01;
  return 0.01 * j + 0.01 * (y - g[j - 1]) / (g[j] - g[j - 1]);
}

double distributional_score(const QuantileGrid& g, double y) {
  double upper = grid_cdf_upper(g, y);
  double lower = grid_cdf_lower(g, y);
  double s = 0.5 - std::min(upper, 1.0 - lower);
  return std::max(s, 0.0);
}

std::optional<Interval> distributional_interval(const QuantileGrid& g, double t) {
  if (t >= 0.49) return Interval(-kInf, kInf);  // family top covers the line
  t = std::max(t, 0.0);
  return Interval(grid_quantile(g, 0.5 - t), grid_quantile(g, 0.5 + t));
}

}  // namespace family_forms

NestedFamily::NestedFamily(FamilyKind kind, PredictorHandle predictor, FamilyParams params)
    : kind_(kind), predictor_(std::move(predictor)), params_(params) {
  switch (kind_) {
    case FamilyKind::MeanSymmetric:
      if (!predictor_.mean) throw std::invalid_argument("family needs a mean predictor");
      break;
    case FamilyKind::MeanScaled:
      if (!predictor_.mean || !predictor_.spread)
        throw std::invalid_argument("family needs mean and spread predictors");
      break;
    default:
      if (!predictor_.quantile) throw std::invalid_argument("family needs a quantile predictor");
      break;
  }
}

NestedFamily::LocalStats NestedFamily::stats_at(std::span<const double> x) const {
  LocalStats s;
  const double eps = params_.floor_value();
  switch (kind_) {
    case FamilyKind::MeanSymmetric:
      s.mu = predictor_.mean(x);
      break;
    case FamilyKind::MeanScaled:
      s.mu = predictor_.mean(x);
      s.sigma = std::max(predictor_.spread(x), eps);
      break;
    case FamilyKind::Cqr:
    case FamilyKind::CqrR: {
      s.q_lo = predictor_.quantile(x, params_.level_lo);
      s.q_hi = predictor_.quantile(x, params_.level_hi);
      if (s.q_lo > s.q_hi) std::swap(s.q_lo, s.q_hi);  // crossing quantiles
      s.scale = std::max(s.q_hi - s.q_lo, eps);
      break;
    }
    case FamilyKind::CqrM: {
      s.q_lo = predictor_.quantile(x, params_.level_lo);
      s.q_hi = predictor_.quantile(x, params_.level_hi);
      double q_med = predictor_.quantile(x, 0.5);
      if (s.q_lo > s.q_hi) std::swap(s.q_lo, s.q_hi);
      s.d_lo = std::max(q_med - s.q_lo, eps);
      s.d_hi = std::max(s.q_hi - q_med, eps);
      break;
    }
    case FamilyKind::Distributional: {
      double prev = -kInf;
      for (int j = 0; j < 99; ++j) {
        double v = predictor_.quantile(x, 0.01 * (j + 1));
        prev = std::max(prev, v);  // enforce monotone grid
        s.grid[j] = prev;
      }
      break;
    }
  }
  return s;
}

double NestedFamily::score(std::span<const double> x, double y) const {
  LocalStats s = stats_at(x);
  switch (kind_) {
    case FamilyKind::MeanSymmetric:
      return family_forms::mean_symmetric_score(s.mu, y);
    case FamilyKind::MeanScaled:
      return family_forms::mean_scaled_score(s.mu, s.sigma, y);
    case FamilyKind::Cqr:
      return family_forms::cqr_score(s.q_lo, s.q_hi, y);
    case FamilyKind::CqrM:
      return family_forms::cqr_m_score(s.q_lo, s.q_hi, s.d_lo, s.d_hi, y);
    case FamilyKind::CqrR:
      return family_forms::cqr_r_score(s.q_lo, s.q_hi, s.scale, y);
    case FamilyKind::Distributional:
      return family_forms::distributional_score(s.grid, y);
  }
  return 0.0;
}

std::optional<Interval> NestedFamily::interval_at(std::span<const double> x, double t) const {
  LocalStats s = stats_at(x);
  switch (kind_) {
    case FamilyKind::MeanSymmetric:
      return family_forms::mean_symmetric_interval(s.mu, t);
    case FamilyKind::MeanScaled:
      return family_forms::mean_scaled_interval(s.mu, s.sigma, t);
    case FamilyKind::Cqr:
      return family_forms::cqr_interval(s.q_lo, s.q_hi, t);
    case FamilyKind::CqrM:
      return family_forms::cqr_m_interval(s.q_lo, s.q_hi, s.d_lo, s.d_hi, t);
    case FamilyKind::CqrR:
      return family_forms::cqr_r_interval(s.q_lo, s.q_hi, s.scale, t);
    case FamilyKind::Distributional:
      return family_forms::distributional_interval(s.grid, t);
  }
  return std::nullopt;
}

}  // namespace ncp
