#include "ncp/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "ncp/interval.hpp"
#include "ncp/parallel.hpp"
#include "ncp/rng.hpp"

namespace ncp {

namespace {

double sum_of(const std::vector<int>& ids, const std::vector<double>& y) {
  double s = 0.0;
  for (int id : ids) s += y[id];
  return s;
}

void finalize_leaf(TreeNode& node, const std::vector<double>& y) {
  node.feature = -1;
  node.left = node.right = -1;
  node.leaf_mean = sum_of(node.members, y) / static_cast<double>(node.members.size());
  node.sorted_values.resize(node.members.size());
  for (std::size_t k = 0; k < node.members.size(); ++k) node.sorted_values[k] = y[node.members[k]];
  std::sort(node.sorted_values.begin(), node.sorted_values.end());
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double children_sse = 0.0;
};

// Exhaustive scan over midpoints of sorted distinct feature values; the best
// split minimizes total child SSE. Ties keep the lowest feature id, then the
// lowest threshold (features are scanned ascending, thresholds ascending,
// and only strict improvements are accepted).
SplitChoice best_split(const Dataset& data, const std::vector<int>& ids, int min_leaf,
                       const std::vector<int>& features) {
  const int m = static_cast<int>(ids.size());
  SplitChoice best;
  best.children_sse = kInf;

  std::vector<int> order(ids.size());
  std::vector<double> prefix_sum(m + 1), prefix_sq(m + 1);

  for (int f : features) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return data.row(ids[a])[f] < data.row(ids[b])[f];
    });

    prefix_sum[0] = prefix_sq[0] = 0.0;
    for (int k = 0; k < m; ++k) {
      double v = data.target(ids[order[k]]);
      prefix_sum[k + 1] = prefix_sum[k] + v;
      prefix_sq[k + 1] = prefix_sq[k] + v * v;
    }
    const double total_sum = prefix_sum[m];
    const double total_sq = prefix_sq[m];

    for (int k = min_leaf; k + min_leaf <= m; ++k) {
      const double a = data.row(ids[order[k - 1]])[f];
      const double b = data.row(ids[order[k]])[f];
      if (a == b) continue;  // not a boundary between distinct values
      const double left_sse = prefix_sq[k] - prefix_sum[k] * prefix_sum[k] / k;
      const double right_sum = total_sum - prefix_sum[k];
      const double right_sse = (total_sq - prefix_sq[k]) - right_sum * right_sum / (m - k);
      const double sse = left_sse + right_sse;
      if (sse < best.children_sse) {
        double thr = 0.5 * (a + b);
        if (thr >= b) thr = a;  // midpoint can round up to b for adjacent doubles
        best = {true, f, thr, sse};
      }
    }
  }
  return best;
}

void grow_tree(std::vector<TreeNode>& nodes, const Dataset& data, std::vector<int> bag, int min_leaf,
               int mtry, Rng& rng) {
  const int d = data.dim();
  nodes.clear();
  nodes.emplace_back();
  nodes[0].members = std::move(bag);

  std::vector<int> all_features(d);
  std::iota(all_features.begin(), all_features.end(), 0);

  // explicit work stack; children are appended so indices stay stable
  std::vector<int> stack = {0};
  while (!stack.empty()) {
    const int ni = stack.back();
    stack.pop_back();
    std::vector<int> ids = std::move(nodes[ni].members);
    const int m = static_cast<int>(ids.size());

    bool pure = true;
    for (int k = 1; k < m && pure; ++k) pure = data.target(ids[k]) == data.target(ids[0]);
    if (m < 2 * min_leaf || pure) {
      nodes[ni].members = std::move(ids);
      finalize_leaf(nodes[ni], data.targets());
      continue;
    }

    std::vector<int> features;
    if (mtry <= 0 || mtry >= d) {
      features = all_features;
    } else {
      features = sample_without_replacement(d, mtry, rng);
      std::sort(features.begin(), features.end());
    }

    SplitChoice split = best_split(data, ids, min_leaf, features);
    if (!split.found) {
      nodes[ni].members = std::move(ids);
      finalize_leaf(nodes[ni], data.targets());
      continue;
    }

    std::vector<int> left_ids, right_ids;
    left_ids.reserve(ids.size());
    right_ids.reserve(ids.size());
    for (int id : ids) {
      (data.row(id)[split.feature] <= split.threshold ? left_ids : right_ids).push_back(id);
    }

    nodes[ni].feature = split.feature;
    nodes[ni].threshold = split.threshold;
    nodes[ni].left = static_cast<int>(nodes.size());
    nodes.emplace_back().members = std::move(left_ids);
    nodes[ni].right = static_cast<int>(nodes.size());
    nodes.emplace_back().members = std::move(right_ids);
    stack.push_back(nodes[ni].left);
    stack.push_back(nodes[ni].right);
  }
}

}  // namespace

const TreeNode& RegressionTree::leaf_at(std::span<const double> x) const {
  int ni = 0;
  while (!nodes_[ni].is_leaf()) {
    ni = (x[nodes_[ni].feature] <= nodes_[ni].threshold) ? nodes_[ni].left : nodes_[ni].right;
  }
  return nodes_[ni];
}

QuantileForest QuantileForest::fit(const Dataset& data, const ForestConfig& config) {
  const int n = data.rows();
  const int m = config.bag_size > 0 ? config.bag_size : n;
  if (n < 2) throw std::invalid_argument("forest fit needs at least 2 training points");
  if (m < 1 || m > n) throw std::invalid_argument("bag size must be in [1, n]");

  std::vector<std::vector<int>> bags(config.trees);
  for (int t = 0; t < config.trees; ++t) {
    Rng bag_rng(Rng::derive(config.seed, 2 * static_cast<std::uint64_t>(t)));
    if (config.sampling == ForestConfig::Sampling::Bootstrap) {
      bags[t].resize(m);
      for (int k = 0; k < m; ++k) bags[t][k] = static_cast<int>(bag_rng.bounded(n));
    } else {
      bags[t] = sample_without_replacement(n, m, bag_rng);
    }
  }
  return fit_with_bags(data, std::move(bags), config);
}

QuantileForest QuantileForest::fit_with_bags(const Dataset& data, std::vector<std::vector<int>> bags,
                                             const ForestConfig& config) {
  const int n = data.rows();
  if (n < 2) throw std::invalid_argument("forest fit needs at least 2 training points");
  if (config.trees < 1 || bags.size() != static_cast<std::size_t>(config.trees)) {
    throw std::invalid_argument("need one bag per tree and at least one tree");
  }
  if (config.min_leaf < 1) throw std::invalid_argument("min_leaf must be >= 1");
  for (const auto& bag : bags) {
    if (bag.empty()) throw std::invalid_argument("empty bag");
    for (int id : bag) {
      if (id < 0 || id >= n) throw std::invalid_argument("bag index out of range");
    }
  }

  QuantileForest forest;
  forest.cfg_ = config;
  forest.n_ = n;
  forest.d_ = data.dim();
  forest.responses_ = data.targets();
  forest.response_scale_ = data.response_scale();
  forest.sorted_support_ = forest.responses_;
  std::sort(forest.sorted_support_.begin(), forest.sorted_support_.end());
  forest.sorted_support_.erase(std::unique(forest.sorted_support_.begin(), forest.sorted_support_.end()),
                               forest.sorted_support_.end());
  forest.bags_ = std::move(bags);
  forest.trees_.resize(config.trees);

  parallel_for(0, config.trees, config.threads, [&](int t) {
    Rng tree_rng(Rng::derive(config.seed, 2 * static_cast<std::uint64_t>(t) + 1));
    grow_tree(forest.trees_[t].nodes_, data, forest.bags_[t], config.min_leaf, config.mtry, tree_rng);
  });

  forest.rebuild_oob_map();
  return forest;
}

void QuantileForest::rebuild_oob_map() {
  oob_map_.assign(n_, {});
  std::vector<char> in_bag(n_);
  for (int t = 0; t < tree_count(); ++t) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (int id : bags_[t]) in_bag[id] = 1;
    for (int i = 0; i < n_; ++i) {
      if (!in_bag[i]) oob_map_[i].push_back(t);
    }
  }
}

std::vector<int> QuantileForest::never_oob_indices() const {
  std::vector<int> out;
  for (int i = 0; i < n_; ++i) {
    if (oob_map_[i].empty()) out.push_back(i);
  }
  return out;
}

std::vector<const TreeNode*> QuantileForest::leaves_at(std::span<const double> x) const {
  std::vector<const TreeNode*> leaves(trees_.size());
  for (std::size_t t = 0; t < trees_.size(); ++t) leaves[t] = &trees_[t].leaf_at(x);
  return leaves;
}

double QuantileForest::subset_mean(const std::vector<const TreeNode*>& leaves,
                                   std::span<const int> tree_ids) const {
  if (tree_ids.empty()) throw std::runtime_error("no out-of-bag trees");
  double s = 0.0;
  for (int t : tree_ids) s += leaves[t]->leaf_mean;
  return s / static_cast<double>(tree_ids.size());
}

double QuantileForest::subset_spread(const std::vector<const TreeNode*>& leaves,
                                     std::span<const int> tree_ids) const {
  if (tree_ids.empty()) throw std::runtime_error("no out-of-bag trees");
  if (tree_ids.size() == 1) return 0.0;
  double s = 0.0;
  for (int t : tree_ids) s += leaves[t]->leaf_mean;
  const double k = static_cast<double>(tree_ids.size());
  const double mean = s / k;
  double ss = 0.0;
  for (int t : tree_ids) {
    const double d = leaves[t]->leaf_mean - mean;
    ss += d * d;
  }
  return std::sqrt(ss / (k - 1.0));  // sample convention over per-tree means
}

double QuantileForest::subset_quantile(const std::vector<const TreeNode*>& leaves,
                                       std::span<const int> tree_ids, double level) const {
  if (tree_ids.empty()) throw std::runtime_error("no out-of-bag trees");
  level = std::clamp(level, 1e-7, 1.0);

  // Pooled CDF with per-tree equal weight: each leaf member contributes
  // 1/(|subset| * leaf size). Generalized inverse via binary search on the
  // sorted training responses (the pooled support is a subset of them).
  auto cdf = [&](double v) {
    double acc = 0.0;
    for (int t : tree_ids) {
      const auto& vals = leaves[t]->sorted_values;
      auto le = std::upper_bound(vals.begin(), vals.end(), v) - vals.begin();
      acc += static_cast<double>(le) / static_cast<double>(vals.size());
    }
    return acc / static_cast<double>(tree_ids.size());
  };

  int lo = 0, hi = static_cast<int>(sorted_support_.size()) - 1;
  // smallest support value whose CDF reaches the level (1e-10 absorbs
  // accumulation noise; CDF jumps are orders of magnitude larger)
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (cdf(sorted_support_[mid]) + 1e-10 >= level) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return sorted_support_[lo];
}

double QuantileForest::query_mean(std::span<const double> x) const {
  auto ids = all_tree_ids();
  return subset_mean(leaves_at(x), ids);
}

double QuantileForest::query_mean(std::span<const double> x, std::span<const int> tree_ids) const {
  return subset_mean(leaves_at(x), tree_ids);
}

double QuantileForest::query_spread(std::span<const double> x) const {
  auto ids = all_tree_ids();
  return subset_spread(leaves_at(x), ids);
}

double QuantileForest::query_spread(std::span<const double> x, std::span<const int> tree_ids) const {
  return subset_spread(leaves_at(x), tree_ids);
}

double QuantileForest::query_quantile(std::span<const double> x, double level) const {
  auto ids = all_tree_ids();
  return subset_quantile(leaves_at(x), ids, level);
}

double QuantileForest::query_quantile(std::span<const double> x, double level,
                                      std::span<const int> tree_ids) const {
  return subset_quantile(leaves_at(x), tree_ids, level);
}

std::vector<int> QuantileForest::all_tree_ids() const {
  std::vector<int> ids(trees_.size());
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

// ---------------------------------------------------------------------------
// serialization

namespace {
constexpr int kForestFormatVersion = 1;
}

std::string QuantileForest::to_json_text() const {
  nlohmann::ordered_json j;
  j["format"] = "ncp-forest";
  j["version"] = kForestFormatVersion;
  j["n"] = n_;
  j["d"] = d_;
  j["seed"] = cfg_.seed;
  j["trees"] = cfg_.trees;
  j["sampling"] = cfg_.sampling == ForestConfig::Sampling::Bootstrap ? "bootstrap" : "subsample";
  j["bag_size"] = cfg_.bag_size;
  j["min_leaf"] = cfg_.min_leaf;
  j["mtry"] = cfg_.mtry;
  j["responses"] = responses_;
  j["bags"] = bags_;
  auto& tree_arr = j["tree_nodes"] = nlohmann::ordered_json::array();
  for (const auto& tree : trees_) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& nd : tree.nodes()) {
      nlohmann::ordered_json e;
      e["f"] = nd.feature;
      e["t"] = nd.threshold;
      e["l"] = nd.left;
      e["r"] = nd.right;
      if (nd.is_leaf()) e["ids"] = nd.members;
      nodes.push_back(std::move(e));
    }
    tree_arr.push_back(std::move(nodes));
  }
  return j.dump();
}

QuantileForest QuantileForest::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("format", "") != "ncp-forest") throw std::runtime_error("not a forest blob");
  if (j.value("version", -1) != kForestFormatVersion) {
    throw std::runtime_error("unsupported forest blob version");
  }

  QuantileForest forest;
  forest.n_ = j.at("n").get<int>();
  forest.d_ = j.at("d").get<int>();
  forest.cfg_.seed = j.at("seed").get<std::uint64_t>();
  forest.cfg_.trees = j.at("trees").get<int>();
  forest.cfg_.sampling = j.at("sampling").get<std::string>() == "bootstrap"
                             ? ForestConfig::Sampling::Bootstrap
                             : ForestConfig::Sampling::Subsample;
  forest.cfg_.bag_size = j.at("bag_size").get<int>();
  forest.cfg_.min_leaf = j.at("min_leaf").get<int>();
  forest.cfg_.mtry = j.at("mtry").get<int>();
  forest.responses_ = j.at("responses").get<std::vector<double>>();
  forest.bags_ = j.at("bags").get<std::vector<std::vector<int>>>();

  forest.sorted_support_ = forest.responses_;
  std::sort(forest.sorted_support_.begin(), forest.sorted_support_.end());
  forest.sorted_support_.erase(std::unique(forest.sorted_support_.begin(), forest.sorted_support_.end()),
                               forest.sorted_support_.end());
  if (!forest.responses_.empty()) {
    auto [mn, mx] = std::minmax_element(forest.responses_.begin(), forest.responses_.end());
    forest.response_scale_ = *mx - *mn;
  }

  for (const auto& nodes : j.at("tree_nodes")) {
    RegressionTree tree;
    for (const auto& e : nodes) {
      TreeNode nd;
      nd.feature = e.at("f").get<int>();
      nd.threshold = e.at("t").get<double>();
      nd.left = e.at("l").get<int>();
      nd.right = e.at("r").get<int>();
      if (nd.is_leaf()) {
        nd.members = e.at("ids").get<std::vector<int>>();
        finalize_leaf(nd, forest.responses_);
      }
      tree.nodes_.push_back(std::move(nd));
    }
    forest.trees_.push_back(std::move(tree));
  }
  if (forest.trees_.size() != forest.bags_.size()) throw std::runtime_error("corrupt forest blob");
  forest.rebuild_oob_map();
  return forest;
}

void QuantileForest::save_json(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write forest blob: " + path);
  out << to_json_text();
}

QuantileForest QuantileForest::load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open forest blob: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

}  // namespace ncp
