#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ncp/dataset.hpp"
#include "ncp/families.hpp"
#include "ncp/forest.hpp"
#include "ncp/interval.hpp"
#include "ncp/rng.hpp"
#include "ncp/sweep.hpp"

namespace ncp {

// One calibration point's contribution at a test x: its score r_i(X_i, Y_i)
// and the interval F_{r_i}(x). The interval is absent exactly when the point
// falls outside Lambda_x (its set at radius r_i is empty at this x).
struct ScoredPoint {
  int index;
  double score;
  std::optional<Interval> interval_at_score;
};

// Cross-conformal aggregation: count condition over the surviving intervals,
// weights 1, threshold alpha*(n+1) - 1.
PredictionSet cross_set(std::span<const ScoredPoint> scored, double alpha, long n);

// Rank-based interval [rank_low of lower ends, rank_high of upper ends] over
// the surviving points; empty when floor(alpha*(n+1)) exceeds their count.
PredictionSet jackknife_plus(std::span<const ScoredPoint> scored, double alpha, long n);

enum class Aggregation { Cross, Hull, JackknifePlus };

// Builds a nested family from a training subset. Must depend only on the
// subset content (not its order) for the exchangeability arguments to apply;
// bootstrap bags may carry repeated ids.
using FamilyBuilder = std::function<NestedFamily(const Dataset& train, std::span<const int> subset)>;

class CalibratedPredictor {
 public:
  virtual ~CalibratedPredictor() = default;
  virtual PredictionSet predict(std::span<const double> x) const = 0;
  virtual double alpha() const = 0;
};

// ---------------------------------------------------------------------------

// Split conformal: one family, one held-out score quantile.
class SplitPredictor final : public CalibratedPredictor {
 public:
  SplitPredictor(NestedFamily family, double radius, double alpha_level)
      : family_(std::move(family)), radius_(radius), alpha_(alpha_level) {}

  PredictionSet predict(std::span<const double> x) const override;
  double alpha() const override { return alpha_; }
  double radius() const { return radius_; }

 private:
  NestedFamily family_;
  double radius_;
  double alpha_;
};

SplitPredictor split_calibrate(NestedFamily family, const Dataset& calibration, double alpha);

// ---------------------------------------------------------------------------

// Leave-one-out / K-fold cross-conformal over per-fold refits.
class CrossConformalPredictor final : public CalibratedPredictor {
 public:
  CrossConformalPredictor(std::vector<NestedFamily> fold_families, std::vector<int> fold_of,
                          std::vector<double> scores, double alpha_level, Aggregation agg);

  std::vector<ScoredPoint> scored_points(std::span<const double> x) const;
  PredictionSet predict(std::span<const double> x) const override;
  PredictionSet predict_cross(std::span<const double> x) const;
  PredictionSet predict_hull(std::span<const double> x) const;
  PredictionSet predict_jp(std::span<const double> x) const;

  double alpha() const override { return alpha_; }
  const std::vector<double>& scores() const { return scores_; }

 private:
  std::vector<NestedFamily> fold_families_;
  std::vector<int> fold_of_;
  std::vector<double> scores_;
  double alpha_;
  Aggregation agg_;
  long n_;
};

// n leave-one-out refits; r_i scored under the family trained without i.
CrossConformalPredictor loo_cross(const Dataset& train, const FamilyBuilder& builder, double alpha,
                                  Aggregation agg = Aggregation::Cross);

// K equal folds assigned by a seeded shuffle; K must divide n exactly. The
// CV+ interval is the JackknifePlus aggregation over the same scored points.
CrossConformalPredictor kfold_cross(const Dataset& train, const FamilyBuilder& builder, int k_folds,
                                    double alpha, std::uint64_t seed,
                                    Aggregation agg = Aggregation::Cross);

// ---------------------------------------------------------------------------

// Out-of-bag conformal on a single fitted ensemble: point i is scored by the
// trees whose bags exclude it.
class OobPredictor final : public CalibratedPredictor {
 public:
  static OobPredictor calibrate(const Dataset& train, std::shared_ptr<const QuantileForest> forest,
                                FamilyKind kind, double alpha, FamilyParams params,
                                Aggregation agg = Aggregation::Cross);

  std::vector<ScoredPoint> scored_points(std::span<const double> x) const;
  PredictionSet predict(std::span<const double> x) const override;
  PredictionSet predict_cross(std::span<const double> x) const;
  PredictionSet predict_hull(std::span<const double> x) const;
  PredictionSet predict_jp(std::span<const double> x) const;

  // Reference view of the implicit per-point family (queries routed through
  // the point's out-of-bag trees); the batched path must agree with it.
  NestedFamily family_for(int index) const;

  double alpha() const override { return alpha_; }
  const std::vector<double>& scores() const { return scores_; }
  const QuantileForest& forest() const { return *forest_; }

 private:
  OobPredictor(std::shared_ptr<const QuantileForest> forest, FamilyKind kind, FamilyParams params,
               std::vector<double> scores, double alpha_level, Aggregation agg);

  std::shared_ptr<const QuantileForest> forest_;
  FamilyKind kind_;
  FamilyParams params_;
  std::vector<double> scores_;
  double alpha_;
  Aggregation agg_;
};

// Probability that one resample leaves a given point out of bag.
double oob_survival_probability(long n, long m, ForestConfig::Sampling sampling);

// Realized ensemble size K ~ Binomial(k_tilde, survival probability); throws
// when the draw comes out zero.
int binomial_tree_count(int k_tilde, long n, long m, ForestConfig::Sampling sampling, Rng& rng);

enum class KMode { FixedK, BinomialK };

// Fits the ensemble (drawing K first in BinomialK mode, with config.trees
// read as K-tilde) and calibrates the out-of-bag scores. beta is the nominal
// quantile level for quantile-pair kinds.
OobPredictor oob_conformal(const Dataset& train, ForestConfig config, FamilyKind kind, double alpha,
                           double beta, Aggregation agg = Aggregation::Cross,
                           KMode k_mode = KMode::FixedK);

// Quantile out-of-bag conformal: quantile-forest OOB pairs feeding the CQR
// family, aggregated cross-conformally (or via JP/hull). beta <= 0 selects
// the default 2 * alpha.
OobPredictor qoob(const Dataset& train, double alpha, ForestConfig config, double beta = 0.0,
                  Aggregation agg = Aggregation::Cross, KMode k_mode = KMode::FixedK);

// ---------------------------------------------------------------------------

// Subsampling / bootstrap conformal: K resample-fitted families, held-out
// residuals per complement, averaged p-value condition evaluated as one
// weighted sweep.
class AggregatedPredictor final : public CalibratedPredictor {
 public:
  AggregatedPredictor(std::vector<NestedFamily> fold_families,
                      std::vector<std::vector<double>> fold_residuals, double alpha_level);

  PredictionSet predict(std::span<const double> x) const override;
  double alpha() const override { return alpha_; }
  const std::vector<std::vector<double>>& residuals() const { return fold_residuals_; }

 private:
  std::vector<NestedFamily> fold_families_;
  std::vector<std::vector<double>> fold_residuals_;
  std::vector<double> fold_weights_;  // 1 / (K * (|complement| + 1))
  double offset_;                     // sum of fold weights
  double alpha_;
};

AggregatedPredictor aggregated_conformal(const Dataset& train, const FamilyBuilder& builder, int k_draws,
                                         ForestConfig::Sampling mode, int resample_size, double alpha,
                                         std::uint64_t seed);

}  // namespace ncp
