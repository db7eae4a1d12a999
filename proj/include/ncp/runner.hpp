#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ncp/conformal.hpp"
#include "ncp/dataset.hpp"

namespace ncp {

struct ExperimentConfig {
  std::string dataset_path;  // CSV pool; mutually exclusive with synthetic_n
  long synthetic_n = 0;      // > 0: generate a synthetic pool of this size
  std::string method = "qoob";
  double alpha = 0.1;
  int trees = 100;
  double beta = 0.0;  // nominal quantile level; 0 -> 2 * alpha
  int k = 8;          // folds (kfold-cc) or resample count (agg methods)
  int replicates = 1;
  int train_size = 768;
  int test_size = 232;
  int min_leaf = 5;
  std::uint64_t seed = 1;
  int threads = 0;       // 0 -> hardware concurrency
  bool timings = false;  // real wall times break byte-for-byte reproducibility

  long subsample_size() const { return static_cast<long>(train_size) + test_size; }
  double effective_beta() const { return beta > 0.0 ? beta : 2.0 * alpha; }
};

struct ReplicateReport {
  int replicate;
  double mean_width;
  double mean_coverage;
  double wall_time_ms;
  bool infinite_width;
};

struct RunSummary {
  ExperimentConfig config;
  std::vector<ReplicateReport> replicates;
  double ave_mean_width = 0.0;
  double sd_of_average = 0.0;  // sample SD of replicate means / sqrt(replicates)
  double ave_mean_coverage = 0.0;
  std::vector<int> flagged;  // replicates that produced an infinite-width set
};

const std::vector<std::string>& known_methods();

// One calibrated predictor on a fitted training set, wired per the method
// tag (split methods re-split train in half internally).
std::unique_ptr<CalibratedPredictor> build_predictor(const Dataset& train, const ExperimentConfig& config,
                                                     std::uint64_t seed, int forest_threads);

// Replicate protocol: per replicate, draw subsample_size points from the
// pool without replacement, split train/test, calibrate, and average width
// and coverage over exactly test_size points. Deterministic given the seed;
// replicates run on a worker pool with per-replicate derived seeds.
RunSummary run_replicates(const Dataset& pool, const ExperimentConfig& config);

// Loads the CSV pool or generates the synthetic one, then runs.
RunSummary run_experiment(const ExperimentConfig& config);

// Plot-ready CSV: one row per replicate.
void write_replicates_csv(const RunSummary& summary, const std::string& path);

// Machine-readable summary with a config echo.
std::string summary_json_text(const RunSummary& summary);
void write_summary_json(const RunSummary& summary, const std::string& path);

}  // namespace ncp
