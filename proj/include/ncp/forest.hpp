#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ncp/dataset.hpp"

namespace ncp {

struct ForestConfig {
  enum class Sampling { Bootstrap, Subsample };

  int trees = 100;
  Sampling sampling = Sampling::Bootstrap;
  int bag_size = 0;  // 0 -> n
  int min_leaf = 5;
  int mtry = 0;      // features tried per node; 0 -> all
  std::uint64_t seed = 1;
  int threads = 1;   // tree growth parallelism; output is schedule-independent
};

// CART node. Internal nodes route on (feature, threshold); leaves carry the
// bag members that reached them (training ids, multiplicity kept) plus their
// responses sorted for quantile queries.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double leaf_mean = 0.0;
  std::vector<int> members;
  std::vector<double> sorted_values;

  bool is_leaf() const { return feature < 0; }
};

class RegressionTree {
 public:
  const TreeNode& leaf_at(std::span<const double> x) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }

 private:
  friend class QuantileForest;
  std::vector<TreeNode> nodes_;
};

// Bagged regression trees with in-bag bookkeeping. Queries can be answered
// from the full ensemble or any tree subset (typically the out-of-bag trees
// of one training point). Immutable after fit; queries are pure.
class QuantileForest {
 public:
  // Variance-reduction CART on each bag; deterministic given the seed
  // (per-tree RNG streams derived from seed + tree id).
  static QuantileForest fit(const Dataset& data, const ForestConfig& config);

  // Same, with a caller-supplied resampling plan (one bag per tree).
  static QuantileForest fit_with_bags(const Dataset& data, std::vector<std::vector<int>> bags,
                                      const ForestConfig& config);

  int tree_count() const { return static_cast<int>(trees_.size()); }
  int train_size() const { return n_; }
  int dim() const { return d_; }
  const ForestConfig& config() const { return cfg_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  const std::vector<std::vector<int>>& bags() const { return bags_; }

  // oob_map()[i] = ids of trees whose bag excludes training point i.
  const std::vector<std::vector<int>>& oob_map() const { return oob_map_; }
  std::vector<int> never_oob_indices() const;

  double response_scale() const { return response_scale_; }

  // One leaf lookup per tree; reused by the subset queries below so a test
  // point is routed through each tree exactly once.
  std::vector<const TreeNode*> leaves_at(std::span<const double> x) const;

  double subset_mean(const std::vector<const TreeNode*>& leaves, std::span<const int> tree_ids) const;
  double subset_spread(const std::vector<const TreeNode*>& leaves, std::span<const int> tree_ids) const;
  double subset_quantile(const std::vector<const TreeNode*>& leaves, std::span<const int> tree_ids,
                         double level) const;

  // Convenience single-point queries. The tree_ids overloads reject an empty
  // subset ("no out-of-bag trees"); the others use the full ensemble.
  double query_mean(std::span<const double> x) const;
  double query_mean(std::span<const double> x, std::span<const int> tree_ids) const;
  double query_spread(std::span<const double> x) const;
  double query_spread(std::span<const double> x, std::span<const int> tree_ids) const;
  double query_quantile(std::span<const double> x, double level) const;
  double query_quantile(std::span<const double> x, double level, std::span<const int> tree_ids) const;

  // Versioned JSON blob (trees, bags, seed); for harness caching.
  std::string to_json_text() const;
  static QuantileForest from_json_text(const std::string& text);
  void save_json(const std::string& path) const;
  static QuantileForest load_json(const std::string& path);

 private:
  void rebuild_oob_map();
  std::vector<int> all_tree_ids() const;

  std::vector<RegressionTree> trees_;
  std::vector<std::vector<int>> bags_;
  std::vector<std::vector<int>> oob_map_;
  std::vector<double> responses_;
  std::vector<double> sorted_support_;  // sorted unique training responses
  ForestConfig cfg_;
  double response_scale_ = 0.0;
  int n_ = 0;
  int d_ = 0;
};

}  // namespace ncp
