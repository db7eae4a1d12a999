#include "ncp/runner.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ncp/parallel.hpp"
#include "ncp/synthetic.hpp"

namespace ncp {

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

nlohmann::ordered_json json_double(double v) {
  if (std::isnan(v) || std::isinf(v)) return fmt_double(v);
  return v;
}

ForestConfig forest_config(const ExperimentConfig& cfg, std::uint64_t seed, int threads,
                           ForestConfig::Sampling sampling = ForestConfig::Sampling::Bootstrap) {
  ForestConfig fc;
  fc.trees = cfg.trees;
  fc.sampling = sampling;
  fc.bag_size = 0;
  fc.min_leaf = cfg.min_leaf;
  fc.mtry = 0;
  fc.seed = seed;
  fc.threads = threads;
  return fc;
}

// Family whose mean is the full-ensemble forest mean fitted on the subset.
FamilyBuilder rf_mean_builder(const ExperimentConfig& cfg, std::uint64_t seed, int threads) {
  return [cfg, seed, threads](const Dataset& train, std::span<const int> subset) {
    Dataset fit_data = train.subset(subset);
    auto forest =
        std::make_shared<const QuantileForest>(QuantileForest::fit(fit_data, forest_config(cfg, seed, threads)));
    PredictorHandle handle;
    handle.mean = [forest](std::span<const double> x) { return forest->query_mean(x); };
    handle.provenance = "rf-mean on " + std::to_string(fit_data.rows()) + " points";
    FamilyParams params;
    params.response_scale = fit_data.response_scale();
    return NestedFamily(FamilyKind::MeanSymmetric, std::move(handle), params);
  };
}

FamilyBuilder rf_cqr_builder(const ExperimentConfig& cfg, std::uint64_t seed, int threads) {
  const double beta = cfg.effective_beta();
  return [cfg, seed, threads, beta](const Dataset& train, std::span<const int> subset) {
    Dataset fit_data = train.subset(subset);
    auto forest =
        std::make_shared<const QuantileForest>(QuantileForest::fit(fit_data, forest_config(cfg, seed, threads)));
    PredictorHandle handle;
    handle.quantile = [forest](std::span<const double> x, double level) {
      return forest->query_quantile(x, level);
    };
    handle.provenance = "rf-quantiles on " + std::to_string(fit_data.rows()) + " points";
    FamilyParams params;
    params.level_lo = beta;
    params.level_hi = 1.0 - beta;
    params.response_scale = fit_data.response_scale();
    return NestedFamily(FamilyKind::Cqr, std::move(handle), params);
  };
}

std::unique_ptr<CalibratedPredictor> build_split(const Dataset& train, const ExperimentConfig& cfg,
                                                 std::uint64_t seed, int threads, bool cqr) {
  const int n = train.rows();
  if (n < 4) throw std::invalid_argument("split methods need at least 4 training points");
  const int half = n / 2;
  std::vector<int> fit_ids(half), cal_ids(n - half);
  std::iota(fit_ids.begin(), fit_ids.end(), 0);
  std::iota(cal_ids.begin(), cal_ids.end(), half);

  FamilyBuilder builder = cqr ? rf_cqr_builder(cfg, seed, threads) : rf_mean_builder(cfg, seed, threads);
  NestedFamily family = builder(train, fit_ids);
  Dataset calibration = train.subset(cal_ids);
  return std::make_unique<SplitPredictor>(split_calibrate(std::move(family), calibration, cfg.alpha));
}

}  // namespace

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> methods = {"sc",      "split-cqr", "kfold-cc",      "oob-cc",
                                                   "oob-ncc", "qoob",      "qoob-jp",       "qoob-conv",
                                                   "subsample-agg",        "bootstrap-agg"};
  return methods;
}

std::unique_ptr<CalibratedPredictor> build_predictor(const Dataset& train, const ExperimentConfig& cfg,
                                                     std::uint64_t seed, int forest_threads) {
  const std::string& m = cfg.method;
  if (m == "sc") return build_split(train, cfg, seed, forest_threads, false);
  if (m == "split-cqr") return build_split(train, cfg, seed, forest_threads, true);
  if (m == "kfold-cc") {
    return std::make_unique<CrossConformalPredictor>(
        kfold_cross(train, rf_mean_builder(cfg, seed, forest_threads), cfg.k, cfg.alpha, seed));
  }
  auto oob_cfg = forest_config(cfg, seed, forest_threads);
  if (m == "oob-cc") {
    return std::make_unique<OobPredictor>(
        oob_conformal(train, oob_cfg, FamilyKind::MeanSymmetric, cfg.alpha, cfg.effective_beta()));
  }
  if (m == "oob-ncc") {
    return std::make_unique<OobPredictor>(
        oob_conformal(train, oob_cfg, FamilyKind::MeanScaled, cfg.alpha, cfg.effective_beta()));
  }
  if (m == "qoob") {
    return std::make_unique<OobPredictor>(qoob(train, cfg.alpha, oob_cfg, cfg.effective_beta()));
  }
  if (m == "qoob-jp") {
    return std::make_unique<OobPredictor>(
        qoob(train, cfg.alpha, oob_cfg, cfg.effective_beta(), Aggregation::JackknifePlus));
  }
  if (m == "qoob-conv") {
    return std::make_unique<OobPredictor>(
        qoob(train, cfg.alpha, oob_cfg, cfg.effective_beta(), Aggregation::Hull));
  }
  if (m == "subsample-agg") {
    return std::make_unique<AggregatedPredictor>(
        aggregated_conformal(train, rf_mean_builder(cfg, seed, forest_threads), cfg.k,
                             ForestConfig::Sampling::Subsample, std::max(1, train.rows() / 2), cfg.alpha,
                             seed));
  }
  if (m == "bootstrap-agg") {
    return std::make_unique<AggregatedPredictor>(
        aggregated_conformal(train, rf_mean_builder(cfg, seed, forest_threads), cfg.k,
                             ForestConfig::Sampling::Bootstrap, train.rows(), cfg.alpha, seed));
  }
  throw std::invalid_argument("unknown method: " + m);
}

RunSummary run_replicates(const Dataset& pool, const ExperimentConfig& cfg) {
  if (cfg.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (cfg.train_size < 2 || cfg.test_size < 1) throw std::invalid_argument("bad train/test sizes");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
  const long subsample = cfg.subsample_size();
  if (pool.rows() < subsample) {
    throw std::runtime_error("dataset has " + std::to_string(pool.rows()) + " rows; need at least " +
                             std::to_string(subsample));
  }
  if (std::find(known_methods().begin(), known_methods().end(), cfg.method) == known_methods().end()) {
    throw std::invalid_argument("unknown method: " + cfg.method);
  }

  int total_threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  total_threads = std::max(1, total_threads);
  const int pool_workers = std::max(1, std::min(total_threads, cfg.replicates));
  const int forest_threads = std::max(1, total_threads / pool_workers);

  RunSummary summary;
  summary.config = cfg;
  summary.config.beta = cfg.effective_beta();
  summary.replicates.resize(cfg.replicates);

  parallel_for(0, cfg.replicates, pool_workers, [&](int b) {
    const std::uint64_t rep_seed = Rng::derive(cfg.seed, static_cast<std::uint64_t>(b) + 1);
    Rng rng(rep_seed);
    std::vector<int> ids = sample_without_replacement(pool.rows(), static_cast<int>(subsample), rng);
    std::vector<int> train_ids(ids.begin(), ids.begin() + cfg.train_size);
    std::vector<int> test_ids(ids.begin() + cfg.train_size, ids.end());
    Dataset train = pool.subset(train_ids);
    Dataset test = pool.subset(test_ids);

    const auto t0 = std::chrono::steady_clock::now();
    auto predictor = build_predictor(train, cfg, Rng::derive(rep_seed, 7), forest_threads);

    if (test.rows() != cfg.test_size) throw std::logic_error("test split size mismatch");
    double width_sum = 0.0;
    long covered = 0;
    bool infinite = false;
    for (int j = 0; j < test.rows(); ++j) {
      PredictionSet set = predictor->predict(test.row(j));
      const double w = set.width();
      if (std::isinf(w)) infinite = true;
      width_sum += w;
      if (set.contains(test.target(j))) ++covered;
    }
    const auto t1 = std::chrono::steady_clock::now();

    ReplicateReport& rep = summary.replicates[b];
    rep.replicate = b;
    rep.mean_width = width_sum / static_cast<double>(cfg.test_size);
    rep.mean_coverage = static_cast<double>(covered) / static_cast<double>(cfg.test_size);
    rep.wall_time_ms =
        cfg.timings ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
    rep.infinite_width = infinite;
  });

  double width_acc = 0.0, cov_acc = 0.0;
  for (const auto& rep : summary.replicates) {
    width_acc += rep.mean_width;
    cov_acc += rep.mean_coverage;
    if (rep.infinite_width) summary.flagged.push_back(rep.replicate);
  }
  const double r = static_cast<double>(cfg.replicates);
  summary.ave_mean_width = width_acc / r;
  summary.ave_mean_coverage = cov_acc / r;
  if (cfg.replicates > 1) {
    if (summary.flagged.empty()) {
      double ss = 0.0;
      for (const auto& rep : summary.replicates) {
        const double d = rep.mean_width - summary.ave_mean_width;
        ss += d * d;
      }
      summary.sd_of_average = std::sqrt(ss / (r - 1.0)) / std::sqrt(r);
    } else {
      summary.sd_of_average = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return summary;
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  if (!cfg.dataset_path.empty() && cfg.synthetic_n > 0) {
    throw std::invalid_argument("give either a dataset path or a synthetic pool size, not both");
  }
  if (cfg.dataset_path.empty() && cfg.synthetic_n <= 0) {
    throw std::invalid_argument("no input data: set a dataset path or a synthetic pool size");
  }
  Dataset pool = cfg.dataset_path.empty()
                     ? synthetic_sample(static_cast<int>(cfg.synthetic_n), Rng::derive(cfg.seed, 0xDA7A))
                     : Dataset::load_csv(cfg.dataset_path);
  return run_replicates(pool, cfg);
}

void write_replicates_csv(const RunSummary& summary, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << "replicate,mean_width,mean_coverage,wall_time_ms\n";
  for (const auto& rep : summary.replicates) {
    out << rep.replicate << ',' << fmt_double(rep.mean_width) << ',' << fmt_double(rep.mean_coverage)
        << ',' << fmt_double(rep.wall_time_ms) << '\n';
  }
}

std::string summary_json_text(const RunSummary& summary) {
  const ExperimentConfig& cfg = summary.config;
  nlohmann::ordered_json j;
  j["method"] = cfg.method;
  nlohmann::ordered_json c;
  c["dataset"] = cfg.dataset_path;
  c["synthetic_n"] = cfg.synthetic_n;
  c["alpha"] = cfg.alpha;
  c["trees"] = cfg.trees;
  c["beta"] = cfg.effective_beta();
  c["k"] = cfg.k;
  c["replicates"] = cfg.replicates;
  c["train_size"] = cfg.train_size;
  c["test_size"] = cfg.test_size;
  c["subsample_size"] = cfg.subsample_size();
  c["min_leaf"] = cfg.min_leaf;
  c["seed"] = cfg.seed;
  j["config"] = std::move(c);
  j["ave_mean_width"] = json_double(summary.ave_mean_width);
  j["sd_of_average"] = json_double(summary.sd_of_average);
  j["ave_mean_coverage"] = json_double(summary.ave_mean_coverage);
  j["flags"]["infinite_width_replicates"] = summary.flagged;
  return j.dump(2) + "\n";
}

void write_summary_json(const RunSummary& summary, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << summary_json_text(summary);
}

}  // namespace ncp
