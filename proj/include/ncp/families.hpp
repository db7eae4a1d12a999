#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "ncp/interval.hpp"

namespace ncp {

// Shapes of the nested interval family F_t(x), each with a dual closed-form
// score r(x, y) = inf{t : y in F_t(x)}.
enum class FamilyKind {
  MeanSymmetric,  // [mu - t, mu + t],                t in [0, inf)
  MeanScaled,     // [mu - t*sigma, mu + t*sigma],    t in [0, inf)
  Cqr,            // [q_lo - t, q_hi + t],            t in (-inf, inf)
  CqrM,           // (1+t)[q_lo, q_hi] - t*q_med,     t in (-inf, inf)
  CqrR,           // [q_lo, q_hi] -+ t*(q_hi - q_lo), t in (-1/2, inf)
  Distributional  // [q_{1/2-t}, q_{1/2+t}] on a fixed 99-level grid
};

// Opaque fitted regressor behind a family: point queries only.
struct PredictorHandle {
  std::function<double(std::span<const double>)> mean;
  std::function<double(std::span<const double>)> spread;
  std::function<double(std::span<const double>, double)> quantile;
  std::string provenance;  // which data trained it, for diagnostics
};

struct FamilyParams {
  double level_lo = 0.05;       // nominal quantile pair for CQR kinds
  double level_hi = 0.95;
  double scale_epsilon = 1e-8;  // relative floor for spreads / denominators
  double response_scale = 1.0;  // max(y) - min(y) of the training response

  double floor_value() const {
    return scale_epsilon * (response_scale > 0.0 ? response_scale : 1.0);
  }
};

// Closed-form score/interval pairs for each kind. Inputs are the already
// fitted local statistics (quantile pairs swapped into order, scales
// floored), so score(y) <= t holds exactly iff y lies in interval(t).
namespace family_forms {

double mean_symmetric_score(double mu, double y);
std::optional<Interval> mean_symmetric_interval(double mu, double t);

double mean_scaled_score(double mu, double sigma, double y);
std::optional<Interval> mean_scaled_interval(double mu, double sigma, double t);

double cqr_score(double q_lo, double q_hi, double y);
std::optional<Interval> cqr_interval(double q_lo, double q_hi, double t);

// d_lo/d_hi are the floored distances from the median to the quantile pair.
double cqr_m_score(double q_lo, double q_hi, double d_lo, double d_hi, double y);
std::optional<Interval> cqr_m_interval(double q_lo, double q_hi, double d_lo, double d_hi, double t);

// s is the floored interquantile width.
double cqr_r_score(double q_lo, double q_hi, double s, double y);
std::optional<Interval> cqr_r_interval(double q_lo, double q_hi, double s, double t);

// Fixed quantile grid at levels {0.01, ..., 0.99}, nondecreasing.
using QuantileGrid = std::array<double, 99>;
double grid_quantile(const QuantileGrid& g, double level);
double grid_cdf_upper(const QuantileGrid& g, double y);  // sup{level : Q(level) <= y}
double grid_cdf_lower(const QuantileGrid& g, double y);  // inf{level : Q(level) >= y}
double distributional_score(const QuantileGrid& g, double y);
std::optional<Interval> distributional_interval(const QuantileGrid& g, double t);

}  // namespace family_forms

// A fitted, queryable nested family: the dual view of one conformity score.
// Immutable after construction; score/interval_at are pure.
class NestedFamily {
 public:
  NestedFamily(FamilyKind kind, PredictorHandle predictor, FamilyParams params = {});

  // r(x, y): smallest radius whose set captures y.
  double score(std::span<const double> x, double y) const;

  // F_t(x); nullopt when the formula yields an empty set. t outside the
  // radius domain is clamped at the domain boundary; at the domain's upper
  // limit the family covers the whole line.
  std::optional<Interval> interval_at(std::span<const double> x, double t) const;

  FamilyKind kind() const { return kind_; }
  const FamilyParams& params() const { return params_; }
  const PredictorHandle& predictor() const { return predictor_; }

 private:
  struct LocalStats {
    double mu = 0.0;
    double sigma = 0.0;
    double q_lo = 0.0;
    double q_hi = 0.0;
    double d_lo = 0.0;
    double d_hi = 0.0;
    double scale = 0.0;
    family_forms::QuantileGrid grid{};
  };
  LocalStats stats_at(std::span<const double> x) const;

  FamilyKind kind_;
  PredictorHandle predictor_;
  FamilyParams params_;
};

}  // namespace ncp
