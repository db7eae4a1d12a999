#include "ncp/ncp.h"

#include <cstring>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>

#include "ncp/conformal.hpp"
#include "ncp/dataset.hpp"
#include "ncp/forest.hpp"
#include "ncp/runner.hpp"
#include "ncp/synthetic.hpp"

struct ncp_dataset {
  ncp::Dataset impl;
};

struct ncp_forest {
  std::shared_ptr<const ncp::QuantileForest> impl;
};

struct ncp_predictor {
  std::unique_ptr<ncp::CalibratedPredictor> impl;
  int dim = 0;
};

struct ncp_set {
  ncp::PredictionSet impl = ncp::PredictionSet::empty_set();
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename F>
ncp_status guarded(F&& body) {
  try {
    return body();
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return NCP_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return NCP_ERR_RUNTIME;
  } catch (...) {
    set_error("unknown error");
    return NCP_ERR_INTERNAL;
  }
}

ncp_status require(bool ok, const char* msg) {
  if (!ok) {
    set_error(msg);
    return NCP_ERR_INVALID_ARGUMENT;
  }
  return NCP_OK;
}

std::span<const double> point_span(const ncp_predictor* p, const double* x, int64_t dim) {
  if (dim != p->dim) throw std::invalid_argument("feature dimension mismatch");
  return {x, static_cast<std::size_t>(dim)};
}

}  // namespace

extern "C" {

const char* ncp_version(void) { return "0.1.0"; }

const char* ncp_last_error(void) { return g_last_error.c_str(); }

/* ------------------------------------------------------------------ */

ncp_status ncp_dataset_load_csv(const char* path, ncp_dataset** out) {
  if (auto st = require(path && out, "null argument"); st != NCP_OK) return st;
  return guarded([&] {
    *out = new ncp_dataset{ncp::Dataset::load_csv(path)};
    return NCP_OK;
  });
}

ncp_status ncp_dataset_synthetic(int64_t n, uint64_t seed, ncp_dataset** out) {
  if (auto st = require(out != nullptr, "null argument"); st != NCP_OK) return st;
  return guarded([&] {
    *out = new ncp_dataset{ncp::synthetic_sample(static_cast<int>(n), seed)};
    return NCP_OK;
  });
}

ncp_status ncp_dataset_from_arrays(const double* features, const double* targets, int64_t rows,
                                   int64_t dim, ncp_dataset** out) {
  if (auto st = require(features && targets && out, "null argument"); st != NCP_OK) return st;
  return guarded([&] {
    std::vector<double> x(features, features + rows * dim);
    std::vector<double> y(targets, targets + rows);
    *out = new ncp_dataset{ncp::Dataset(std::move(x), std::move(y), static_cast<int>(dim))};
    return NCP_OK;
  });
}

int64_t ncp_dataset_rows(const ncp_dataset* data) { return data ? data->impl.rows() : 0; }

int64_t ncp_dataset_dim(const ncp_dataset* data) { return data ? data->impl.dim() : 0; }

void ncp_dataset_free(ncp_dataset* data) { delete data; }

/* ------------------------------------------------------------------ */

void ncp_forest_config_init(ncp_forest_config* config) {
  if (!config) return;
  config->trees = 100;
  config->sampling = NCP_SAMPLING_BOOTSTRAP;
  config->bag_size = 0;
  config->min_leaf = 5;
  config->mtry = 0;
  config->seed = 1;
  config->threads = 1;
}

ncp_status ncp_forest_fit(const ncp_dataset* data, const ncp_forest_config* config, ncp_forest** out) {
  if (auto st = require(data && config && out, "null argument"); st != NCP_OK) return st;
  return guarded([&] {
    ncp::ForestConfig cfg;
    cfg.trees = config->trees;
    cfg.sampling = config->sampling == NCP_SAMPLING_SUBSAMPLE ? ncp::ForestConfig::Sampling::Subsample
                                                              : ncp::ForestConfig::Sampling::Bootstrap;
    cfg.bag_size = config->bag_size;
    cfg.min_leaf = config->min_leaf;
    cfg.mtry = config->mtry;
    cfg.seed = config->seed;
    cfg.threads = config->threads;
    *out = new ncp_forest{
        std::make_shared<const ncp::QuantileForest>(ncp::QuantileForest::fit(data->impl, cfg))};
    return NCP_OK;
  });
}

int32_t ncp_forest_tree_count(const ncp_forest* forest) {
  return forest ? forest->impl->tree_count() : 0;
}

ncp_status ncp_forest_mean(const ncp_forest* forest, const double* x, int64_t dim, double* out) {
  if (auto st = require(forest && x && out, "null argument"); st != NCP_OK) return st;
  return guarded([&] {
    if (dim != forest->impl->dim()) throw std::invalid_argument("feature dimension mismatch");
    *out = forest->impl->query_mean({x, static_cast<std::size_t>(dim)});
    return NCP_OK;
  });
}

ncp_status ncp_forest_spread(const ncp_forest* forest, const double* x, int64_t dim, double* out) {
  if (auto st = require(forest && x && out, "null argument"); st != NCP_OK) return st;
  return guarded([&] {
    if (dim != forest->impl->dim()) throw std::invalid_argument("feature dimension mismatch");
    *out = forest->impl->query_spread({x, static_cast<std::size_t>(dim)});
    return NCP_OK;
  });
}

ncp_status ncp_forest_quantile(const ncp_forest* forest, const double* x, int64_t dim, double level,
                               double* out) {
  if (auto st = require(forest && x && out, "null argument"); st != NCP_OK) return st;
  return guarded([&] {
    if (dim != forest->impl->dim()) throw std::invalid_argument("feature dimension mismatch");
    *out = forest->impl->query_quantile({x, static_cast<std::size_t>(dim)}, level);
    return NCP_OK;
  });
}

ncp_status ncp_forest_save_json(const ncp_forest* forest, const char* path) {
  if (auto st = require(forest && path, "null argument"); st != NCP_OK) return st;
  return guarded([&] {
    forest->impl->save_json(path);
    return NCP_OK;
  });
}

ncp_status ncp_forest_load_json(const char* path, ncp_forest** out) {
  if (auto st = require(path && out, "null argument"); st != NCP_OK) return st;
  return guarded([&] {
    *out = new ncp_forest{
        std::make_shared<const ncp::QuantileForest>(ncp::QuantileForest::load_json(path))};
    return NCP_OK;
  });
}

void ncp_forest_free(ncp_forest* forest) { delete forest; }

/* ------------------------------------------------------------------ */

void ncp_method_config_init(ncp_method_config* config) {
  if (!config) return;
  config->method = "qoob";
  config->alpha = 0.1;
  config->trees = 100;
  config->beta = 0.0;
  config->k = 8;
  config->min_leaf = 5;
  config->seed = 1;
  config->threads = 1;
}

ncp_status ncp_calibrate(const ncp_dataset* train, const ncp_method_config* config, ncp_predictor** out) {
  if (auto st = require(train && config && config->method && out, "null argument"); st != NCP_OK) {
    return st;
  }
  return guarded([&] {
    ncp::ExperimentConfig cfg;
    cfg.method = config->method;
    cfg.alpha = config->alpha;
    cfg.trees = config->trees;
    cfg.beta = config->beta;
    cfg.k = config->k;
    cfg.min_leaf = config->min_leaf;
    cfg.seed = config->seed;
    auto predictor = ncp::build_predictor(train->impl, cfg, config->seed,
                                          config->threads > 0 ? config->threads : 1);
    *out = new ncp_predictor{std::move(predictor), train->impl.dim()};
    return NCP_OK;
  });
}

ncp_status ncp_predict(const ncp_predictor* predictor, const double* x, int64_t dim, ncp_set** out) {
  if (auto st = require(predictor && x && out, "null argument"); st != NCP_OK) return st;
  return guarded([&] {
    *out = new ncp_set{predictor->impl->predict(point_span(predictor, x, dim))};
    return NCP_OK;
  });
}

void ncp_predictor_free(ncp_predictor* predictor) { delete predictor; }

/* ------------------------------------------------------------------ */

int32_t ncp_set_kind_of(const ncp_set* set) {
  if (!set) return NCP_SET_EMPTY;
  switch (set->impl.kind()) {
    case ncp::PredictionSet::Kind::Empty:
      return NCP_SET_EMPTY;
    case ncp::PredictionSet::Kind::FullLine:
      return NCP_SET_FULL_LINE;
    case ncp::PredictionSet::Kind::Union:
      return NCP_SET_UNION;
  }
  return NCP_SET_EMPTY;
}

int64_t ncp_set_piece_count(const ncp_set* set) {
  return set ? static_cast<int64_t>(set->impl.pieces().size()) : 0;
}

ncp_status ncp_set_piece(const ncp_set* set, int64_t index, double* lo, double* hi) {
  if (auto st = require(set && lo && hi, "null argument"); st != NCP_OK) return st;
  if (index < 0 || index >= static_cast<int64_t>(set->impl.pieces().size())) {
    set_error("piece index out of range");
    return NCP_ERR_INVALID_ARGUMENT;
  }
  *lo = set->impl.pieces()[index].lo;
  *hi = set->impl.pieces()[index].hi;
  return NCP_OK;
}

double ncp_set_width(const ncp_set* set) { return set ? set->impl.width() : 0.0; }

int32_t ncp_set_contains(const ncp_set* set, double y) {
  return set && set->impl.contains(y) ? 1 : 0;
}

void ncp_set_free(ncp_set* set) { delete set; }

/* ------------------------------------------------------------------ */

void ncp_bench_config_init(ncp_bench_config* config) {
  if (!config) return;
  config->dataset_path = nullptr;
  config->synthetic_n = 0;
  config->method = "qoob";
  config->alpha = 0.1;
  config->trees = 100;
  config->beta = 0.0;
  config->k = 8;
  config->replicates = 1;
  config->train_size = 768;
  config->test_size = 232;
  config->min_leaf = 5;
  config->seed = 1;
  config->threads = 0;
  config->timings = 0;
  config->out_dir = nullptr;
  config->write_csv = 1;
  config->write_json = 1;
}

ncp_status ncp_bench_run(const ncp_bench_config* config, ncp_bench_summary* out) {
  if (auto st = require(config && config->method, "null argument"); st != NCP_OK) return st;
  return guarded([&] {
    ncp::ExperimentConfig cfg;
    cfg.dataset_path = config->dataset_path ? config->dataset_path : "";
    cfg.synthetic_n = config->synthetic_n;
    cfg.method = config->method;
    cfg.alpha = config->alpha;
    cfg.trees = config->trees;
    cfg.beta = config->beta;
    cfg.k = config->k;
    cfg.replicates = config->replicates;
    cfg.train_size = config->train_size;
    cfg.test_size = config->test_size;
    cfg.min_leaf = config->min_leaf;
    cfg.seed = config->seed;
    cfg.threads = config->threads;
    cfg.timings = config->timings != 0;

    ncp::RunSummary summary = ncp::run_experiment(cfg);

    if (config->out_dir && *config->out_dir) {
      std::filesystem::path dir(config->out_dir);
      std::filesystem::create_directories(dir);
      if (config->write_csv) ncp::write_replicates_csv(summary, (dir / "replicates.csv").string());
      if (config->write_json) ncp::write_summary_json(summary, (dir / "summary.json").string());
    }

    if (out) {
      out->ave_mean_width = summary.ave_mean_width;
      out->sd_of_average = summary.sd_of_average;
      out->ave_mean_coverage = summary.ave_mean_coverage;
      out->flagged_replicates = static_cast<int64_t>(summary.flagged.size());
    }
    return NCP_OK;
  });
}

} /* extern "C" */
