#include "ncp/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ncp/rank.hpp"

namespace ncp {

namespace {

PredictionSet set_from_interval(const std::optional<Interval>& iv) {
  if (!iv) return PredictionSet::empty_set();
  return PredictionSet::from_pieces({*iv});
}

}  // namespace

PredictionSet cross_set(std::span<const ScoredPoint> scored, double alpha, long n) {
  std::vector<SweepEntry> entries;
  entries.reserve(scored.size());
  for (const ScoredPoint& p : scored) {
    if (p.interval_at_score) entries.push_back({*p.interval_at_score, 1.0});
  }
  return sweep_union(entries, unweighted_threshold(alpha, n));
}

PredictionSet jackknife_plus(std::span<const ScoredPoint> scored, double alpha, long n) {
  std::vector<double> lows, neg_highs;
  lows.reserve(scored.size());
  neg_highs.reserve(scored.size());
  for (const ScoredPoint& p : scored) {
    if (p.interval_at_score) {
      lows.push_back(p.interval_at_score->lo);
      neg_highs.push_back(-p.interval_at_score->hi);
    }
  }
  // both ends use the floor(alpha*(n+1)) rank over the surviving endpoints:
  // the k-th smallest lower end and the k-th largest upper end
  auto lo = rank_low(std::move(lows), alpha, n);
  if (!lo) return PredictionSet::empty_set();
  auto neg_hi = rank_low(std::move(neg_highs), alpha, n);
  if (!neg_hi) return PredictionSet::empty_set();
  double hi = -*neg_hi;
  if (*lo == -kInf && hi == kInf) return PredictionSet::full_line();
  if (*lo > hi) return PredictionSet::empty_set();
  return PredictionSet::from_pieces({Interval(*lo, hi)});
}

// ---------------------------------------------------------------------------
// split conformal

PredictionSet SplitPredictor::predict(std::span<const double> x) const {
  auto iv = family_.interval_at(x, radius_);
  if (iv && iv->lo == -kInf && iv->hi == kInf) return PredictionSet::full_line();
  return set_from_interval(iv);
}

SplitPredictor split_calibrate(NestedFamily family, const Dataset& calibration, double alpha) {
  std::vector<double> scores;
  scores.reserve(calibration.rows());
  for (int i = 0; i < calibration.rows(); ++i) {
    scores.push_back(family.score(calibration.row(i), calibration.target(i)));
  }
  double radius = conformal_quantile(std::move(scores), alpha);
  return SplitPredictor(std::move(family), radius, alpha);
}

// ---------------------------------------------------------------------------
// cross-conformal over explicit refits

CrossConformalPredictor::CrossConformalPredictor(std::vector<NestedFamily> fold_families,
                                                 std::vector<int> fold_of, std::vector<double> scores,
                                                 double alpha_level, Aggregation agg)
    : fold_families_(std::move(fold_families)),
      fold_of_(std::move(fold_of)),
      scores_(std::move(scores)),
      alpha_(alpha_level),
      agg_(agg),
      n_(static_cast<long>(fold_of_.size())) {}

std::vector<ScoredPoint> CrossConformalPredictor::scored_points(std::span<const double> x) const {
  std::vector<ScoredPoint> pts;
  pts.reserve(fold_of_.size());
  for (std::size_t i = 0; i < fold_of_.size(); ++i) {
    const NestedFamily& fam = fold_families_[fold_of_[i]];
    pts.push_back({static_cast<int>(i), scores_[i], fam.interval_at(x, scores_[i])});
  }
  return pts;
}

PredictionSet CrossConformalPredictor::predict(std::span<const double> x) const {
  switch (agg_) {
    case Aggregation::Cross:
      return predict_cross(x);
    case Aggregation::Hull:
      return predict_hull(x);
    case Aggregation::JackknifePlus:
      return predict_jp(x);
  }
  return predict_cross(x);
}

PredictionSet CrossConformalPredictor::predict_cross(std::span<const double> x) const {
  return cross_set(scored_points(x), alpha_, n_);
}

PredictionSet CrossConformalPredictor::predict_hull(std::span<const double> x) const {
  return predict_cross(x).convex_hull();
}

PredictionSet CrossConformalPredictor::predict_jp(std::span<const double> x) const {
  return jackknife_plus(scored_points(x), alpha_, n_);
}

CrossConformalPredictor loo_cross(const Dataset& train, const FamilyBuilder& builder, double alpha,
                                  Aggregation agg) {
  const int n = train.rows();
  if (n < 2) throw std::invalid_argument("leave-one-out needs at least 2 training points");

  std::vector<NestedFamily> families;
  families.reserve(n);
  std::vector<int> fold_of(n);
  std::vector<double> scores(n);
  std::vector<int> subset;
  subset.reserve(n - 1);
  for (int i = 0; i < n; ++i) {
    subset.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i) subset.push_back(j);
    }
    families.push_back(builder(train, subset));
    fold_of[i] = i;
    scores[i] = families.back().score(train.row(i), train.target(i));
  }
  return CrossConformalPredictor(std::move(families), std::move(fold_of), std::move(scores), alpha, agg);
}

CrossConformalPredictor kfold_cross(const Dataset& train, const FamilyBuilder& builder, int k_folds,
                                    double alpha, std::uint64_t seed, Aggregation agg) {
  const int n = train.rows();
  if (k_folds < 2 || k_folds > n) throw std::invalid_argument("fold count must be in [2, n]");
  if (n % k_folds != 0) throw std::invalid_argument("fold sizes must be equal");
  const int fold_size = n / k_folds;

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(Rng::derive(seed, 0xf01d));
  shuffle_ids(perm, rng);

  std::vector<int> fold_of(n);
  for (int j = 0; j < n; ++j) fold_of[perm[j]] = j / fold_size;

  std::vector<NestedFamily> families;
  families.reserve(k_folds);
  std::vector<int> subset;
  subset.reserve(n - fold_size);
  for (int k = 0; k < k_folds; ++k) {
    subset.clear();
    for (int j = 0; j < n; ++j) {
      if (fold_of[j] != k) subset.push_back(j);
    }
    families.push_back(builder(train, subset));
  }

  std::vector<double> scores(n);
  for (int i = 0; i < n; ++i) scores[i] = families[fold_of[i]].score(train.row(i), train.target(i));
  return CrossConformalPredictor(std::move(families), std::move(fold_of), std::move(scores), alpha, agg);
}

// ---------------------------------------------------------------------------
// out-of-bag conformal

namespace {

// Local statistics of the implicit family of one training point, computed
// from its out-of-bag trees at a fixed query point.
struct OobStats {
  double mu = 0.0;
  double sigma = 0.0;
  double q_lo = 0.0;
  double q_hi = 0.0;
  double d_lo = 0.0;
  double d_hi = 0.0;
  double scale = 0.0;
  family_forms::QuantileGrid grid{};
};

OobStats oob_stats(const QuantileForest& forest, const std::vector<const TreeNode*>& leaves,
                   std::span<const int> sub, FamilyKind kind, const FamilyParams& params) {
  OobStats s;
  const double eps = params.floor_value();
  switch (kind) {
    case FamilyKind::MeanSymmetric:
      s.mu = forest.subset_mean(leaves, sub);
      break;
    case FamilyKind::MeanScaled:
      s.mu = forest.subset_mean(leaves, sub);
      s.sigma = std::max(forest.subset_spread(leaves, sub), eps);
      break;
    case FamilyKind::Cqr:
    case FamilyKind::CqrR:
      s.q_lo = forest.subset_quantile(leaves, sub, params.level_lo);
      s.q_hi = forest.subset_quantile(leaves, sub, params.level_hi);
      if (s.q_lo > s.q_hi) std::swap(s.q_lo, s.q_hi);
      s.scale = std::max(s.q_hi - s.q_lo, eps);
      break;
    case FamilyKind::CqrM: {
      s.q_lo = forest.subset_quantile(leaves, sub, params.level_lo);
      s.q_hi = forest.subset_quantile(leaves, sub, params.level_hi);
      double q_med = forest.subset_quantile(leaves, sub, 0.5);
      if (s.q_lo > s.q_hi) std::swap(s.q_lo, s.q_hi);
      s.d_lo = std::max(q_med - s.q_lo, eps);
      s.d_hi = std::max(s.q_hi - q_med, eps);
      break;
    }
    case FamilyKind::Distributional: {
      double prev = -kInf;
      for (int j = 0; j < 99; ++j) {
        prev = std::max(prev, forest.subset_quantile(leaves, sub, 0.01 * (j + 1)));
        s.grid[j] = prev;
      }
      break;
    }
  }
  return s;
}

double oob_score(FamilyKind kind, const OobStats& s, double y) {
  switch (kind) {
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

std::optional<Interval> oob_interval(FamilyKind kind, const OobStats& s, double t) {
  switch (kind) {
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

}  // namespace

OobPredictor::OobPredictor(std::shared_ptr<const QuantileForest> forest, FamilyKind kind,
                           FamilyParams params, std::vector<double> scores, double alpha_level,
                           Aggregation agg)
    : forest_(std::move(forest)),
      kind_(kind),
      params_(params),
      scores_(std::move(scores)),
      alpha_(alpha_level),
      agg_(agg) {}

OobPredictor OobPredictor::calibrate(const Dataset& train, std::shared_ptr<const QuantileForest> forest,
                                     FamilyKind kind, double alpha, FamilyParams params, Aggregation agg) {
  if (!forest) throw std::invalid_argument("null forest");
  if (train.rows() != forest->train_size()) {
    throw std::invalid_argument("forest was fitted on a different sample size");
  }
  const auto& oob = forest->oob_map();
  std::vector<double> scores(train.rows());
  for (int i = 0; i < train.rows(); ++i) {
    if (oob[i].empty()) throw std::runtime_error("index never out-of-bag");
    auto leaves = forest->leaves_at(train.row(i));
    OobStats s = oob_stats(*forest, leaves, oob[i], kind, params);
    scores[i] = oob_score(kind, s, train.target(i));
  }
  return OobPredictor(std::move(forest), kind, params, std::move(scores), alpha, agg);
}

std::vector<ScoredPoint> OobPredictor::scored_points(std::span<const double> x) const {
  auto leaves = forest_->leaves_at(x);
  const auto& oob = forest_->oob_map();
  std::vector<ScoredPoint> pts;
  pts.reserve(scores_.size());
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    OobStats s = oob_stats(*forest_, leaves, oob[i], kind_, params_);
    pts.push_back({static_cast<int>(i), scores_[i], oob_interval(kind_, s, scores_[i])});
  }
  return pts;
}

PredictionSet OobPredictor::predict(std::span<const double> x) const {
  switch (agg_) {
    case Aggregation::Cross:
      return predict_cross(x);
    case Aggregation::Hull:
      return predict_hull(x);
    case Aggregation::JackknifePlus:
      return predict_jp(x);
  }
  return predict_cross(x);
}

PredictionSet OobPredictor::predict_cross(std::span<const double> x) const {
  return cross_set(scored_points(x), alpha_, static_cast<long>(scores_.size()));
}

PredictionSet OobPredictor::predict_hull(std::span<const double> x) const {
  return predict_cross(x).convex_hull();
}

PredictionSet OobPredictor::predict_jp(std::span<const double> x) const {
  return jackknife_plus(scored_points(x), alpha_, static_cast<long>(scores_.size()));
}

NestedFamily OobPredictor::family_for(int index) const {
  const auto& sub = forest_->oob_map().at(index);
  if (sub.empty()) throw std::runtime_error("index never out-of-bag");
  auto forest = forest_;
  std::vector<int> ids(sub.begin(), sub.end());
  PredictorHandle handle;
  handle.mean = [forest, ids](std::span<const double> x) { return forest->query_mean(x, ids); };
  handle.spread = [forest, ids](std::span<const double> x) { return forest->query_spread(x, ids); };
  handle.quantile = [forest, ids](std::span<const double> x, double level) {
    return forest->query_quantile(x, level, ids);
  };
  handle.provenance = "oob trees of point " + std::to_string(index);
  return NestedFamily(kind_, std::move(handle), params_);
}

double oob_survival_probability(long n, long m, ForestConfig::Sampling sampling) {
  if (sampling == ForestConfig::Sampling::Bootstrap) {
    return std::pow(1.0 - 1.0 / static_cast<double>(n + 1), static_cast<double>(m));
  }
  return 1.0 - static_cast<double>(m) / static_cast<double>(n + 1);
}

int binomial_tree_count(int k_tilde, long n, long m, ForestConfig::Sampling sampling, Rng& rng) {
  const double p = oob_survival_probability(n, m, sampling);
  int k = 0;
  for (int j = 0; j < k_tilde; ++j) {
    if (rng.uniform01() < p) ++k;
  }
  if (k == 0) throw std::runtime_error("binomial tree count drawn as zero");
  return k;
}

OobPredictor oob_conformal(const Dataset& train, ForestConfig config, FamilyKind kind, double alpha,
                           double beta, Aggregation agg, KMode k_mode) {
  if (k_mode == KMode::BinomialK) {
    // K is drawn before any data-dependent fitting
    Rng rng(Rng::derive(config.seed, 0xb10));
    const long m = config.bag_size > 0 ? config.bag_size : train.rows();
    config.trees = binomial_tree_count(config.trees, train.rows(), m, config.sampling, rng);
  }
  auto forest = std::make_shared<const QuantileForest>(QuantileForest::fit(train, config));
  FamilyParams params;
  params.level_lo = beta;
  params.level_hi = 1.0 - beta;
  params.response_scale = train.response_scale();
  return OobPredictor::calibrate(train, std::move(forest), kind, alpha, params, agg);
}

OobPredictor qoob(const Dataset& train, double alpha, ForestConfig config, double beta, Aggregation agg,
                  KMode k_mode) {
  if (beta <= 0.0) beta = 2.0 * alpha;  // default nominal quantile level
  if (beta <= 0.0 || beta >= 0.5) throw std::invalid_argument("nominal quantile level must be in (0, 1/2)");
  if (config.trees < 2) throw std::invalid_argument("quantile out-of-bag needs at least 2 trees");
  return oob_conformal(train, config, FamilyKind::Cqr, alpha, beta, agg, k_mode);
}

// ---------------------------------------------------------------------------
// subsampling / bootstrap conformal

AggregatedPredictor::AggregatedPredictor(std::vector<NestedFamily> fold_families,
                                         std::vector<std::vector<double>> fold_residuals,
                                         double alpha_level)
    : fold_families_(std::move(fold_families)),
      fold_residuals_(std::move(fold_residuals)),
      alpha_(alpha_level) {
  const double k = static_cast<double>(fold_families_.size());
  offset_ = 0.0;
  fold_weights_.reserve(fold_residuals_.size());
  for (const auto& res : fold_residuals_) {
    double w = 1.0 / (k * static_cast<double>(res.size() + 1));
    fold_weights_.push_back(w);
    offset_ += w;
  }
}

PredictionSet AggregatedPredictor::predict(std::span<const double> x) const {
  std::vector<SweepEntry> entries;
  for (std::size_t k = 0; k < fold_families_.size(); ++k) {
    for (double r : fold_residuals_[k]) {
      auto iv = fold_families_[k].interval_at(x, r);
      if (iv) entries.push_back({*iv, fold_weights_[k]});
    }
  }
  // averaged p-value condition rearranged into a weighted stabbing condition
  return sweep_union(entries, alpha_ - offset_);
}

AggregatedPredictor aggregated_conformal(const Dataset& train, const FamilyBuilder& builder, int k_draws,
                                         ForestConfig::Sampling mode, int resample_size, double alpha,
                                         std::uint64_t seed) {
  const int n = train.rows();
  if (k_draws < 1) throw std::invalid_argument("need at least one resample");
  if (resample_size < 1 || resample_size > n) throw std::invalid_argument("resample size must be in [1, n]");

  std::vector<NestedFamily> families;
  families.reserve(k_draws);
  std::vector<std::vector<double>> residuals(k_draws);
  for (int k = 0; k < k_draws; ++k) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(k)));
    std::vector<int> bag;
    if (mode == ForestConfig::Sampling::Bootstrap) {
      bag.resize(resample_size);
      for (int j = 0; j < resample_size; ++j) bag[j] = static_cast<int>(rng.bounded(n));
    } else {
      bag = sample_without_replacement(n, resample_size, rng);
    }
    std::sort(bag.begin(), bag.end());

    std::vector<char> in_bag(n, 0);
    for (int id : bag) in_bag[id] = 1;
    std::vector<int> complement;
    for (int j = 0; j < n; ++j) {
      if (!in_bag[j]) complement.push_back(j);
    }
    if (complement.empty()) throw std::runtime_error("degenerate resample");

    families.push_back(builder(train, bag));
    auto& res = residuals[k];
    res.reserve(complement.size());
    for (int i : complement) res.push_back(families.back().score(train.row(i), train.target(i)));
  }
  return AggregatedPredictor(std::move(families), std::move(residuals), alpha);
}

}  // namespace ncp
