/*
 * C API for the nested conformal prediction library.
 *
 * All functions are thread-safe; handles are opaque and single-owner.
 * Functions returning ncp_status set a thread-local message readable via
 * ncp_last_error() on failure. Output handles are written only on NCP_OK
 * and must be released with the matching *_free call.
 */
#ifndef NCP_H
#define NCP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NCP_API __declspec(dllexport)
#else
#define NCP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ncp_status {
  NCP_OK = 0,
  NCP_ERR_INVALID_ARGUMENT = 1,
  NCP_ERR_RUNTIME = 2,
  NCP_ERR_INTERNAL = 3
} ncp_status;

NCP_API const char* ncp_version(void);

/* Message for the most recent failure on the calling thread. */
NCP_API const char* ncp_last_error(void);

typedef struct ncp_dataset ncp_dataset;
typedef struct ncp_forest ncp_forest;
typedef struct ncp_predictor ncp_predictor;
typedef struct ncp_set ncp_set;

/* ------------------------------------------------------------------ */
/* datasets                                                           */

/* Numeric CSV with a header; target in the last column. */
NCP_API ncp_status ncp_dataset_load_csv(const char* path, ncp_dataset** out);

/* Synthetic 1-d benchmark pool (seeded, deterministic). */
NCP_API ncp_status ncp_dataset_synthetic(int64_t n, uint64_t seed, ncp_dataset** out);

/* Row-major features (rows x dim) plus `rows` targets; data is copied. */
NCP_API ncp_status ncp_dataset_from_arrays(const double* features, const double* targets, int64_t rows,
                                           int64_t dim, ncp_dataset** out);

NCP_API int64_t ncp_dataset_rows(const ncp_dataset* data);
NCP_API int64_t ncp_dataset_dim(const ncp_dataset* data);
NCP_API void ncp_dataset_free(ncp_dataset* data);

/* ------------------------------------------------------------------ */
/* quantile regression forests                                        */

typedef enum ncp_sampling { NCP_SAMPLING_BOOTSTRAP = 0, NCP_SAMPLING_SUBSAMPLE = 1 } ncp_sampling;

typedef struct ncp_forest_config {
  int32_t trees;
  int32_t sampling; /* ncp_sampling */
  int32_t bag_size; /* 0 -> training size */
  int32_t min_leaf;
  int32_t mtry; /* features tried per split; 0 -> all */
  uint64_t seed;
  int32_t threads; /* 0 -> hardware concurrency */
} ncp_forest_config;

NCP_API void ncp_forest_config_init(ncp_forest_config* config);

NCP_API ncp_status ncp_forest_fit(const ncp_dataset* data, const ncp_forest_config* config,
                                  ncp_forest** out);

NCP_API int32_t ncp_forest_tree_count(const ncp_forest* forest);

/* Point queries over the full ensemble. */
NCP_API ncp_status ncp_forest_mean(const ncp_forest* forest, const double* x, int64_t dim, double* out);
NCP_API ncp_status ncp_forest_spread(const ncp_forest* forest, const double* x, int64_t dim, double* out);
NCP_API ncp_status ncp_forest_quantile(const ncp_forest* forest, const double* x, int64_t dim,
                                       double level, double* out);

/* Versioned JSON blob (trees, bags, seed) for harness caching. */
NCP_API ncp_status ncp_forest_save_json(const ncp_forest* forest, const char* path);
NCP_API ncp_status ncp_forest_load_json(const char* path, ncp_forest** out);

NCP_API void ncp_forest_free(ncp_forest* forest);

/* ------------------------------------------------------------------ */
/* calibrated conformal predictors                                    */

/*
 * method is one of: sc, split-cqr, kfold-cc, oob-cc, oob-ncc, qoob,
 * qoob-jp, qoob-conv, subsample-agg, bootstrap-agg.
 */
typedef struct ncp_method_config {
  const char* method;
  double alpha;
  int32_t trees;
  double beta; /* nominal quantile level; 0 -> 2 * alpha */
  int32_t k;   /* folds (kfold-cc) or resample count (agg methods) */
  int32_t min_leaf;
  uint64_t seed;
  int32_t threads;
} ncp_method_config;

NCP_API void ncp_method_config_init(ncp_method_config* config);

NCP_API ncp_status ncp_calibrate(const ncp_dataset* train, const ncp_method_config* config,
                                 ncp_predictor** out);

NCP_API ncp_status ncp_predict(const ncp_predictor* predictor, const double* x, int64_t dim,
                               ncp_set** out);

NCP_API void ncp_predictor_free(ncp_predictor* predictor);

/* ------------------------------------------------------------------ */
/* prediction sets                                                    */

typedef enum ncp_set_kind { NCP_SET_EMPTY = 0, NCP_SET_FULL_LINE = 1, NCP_SET_UNION = 2 } ncp_set_kind;

NCP_API int32_t ncp_set_kind_of(const ncp_set* set);
NCP_API int64_t ncp_set_piece_count(const ncp_set* set);
NCP_API ncp_status ncp_set_piece(const ncp_set* set, int64_t index, double* lo, double* hi);
NCP_API double ncp_set_width(const ncp_set* set);
NCP_API int32_t ncp_set_contains(const ncp_set* set, double y);
NCP_API void ncp_set_free(ncp_set* set);

/* ------------------------------------------------------------------ */
/* benchmark harness                                                  */

typedef struct ncp_bench_config {
  const char* dataset_path; /* NULL/empty -> use synthetic_n */
  int64_t synthetic_n;
  const char* method;
  double alpha;
  int32_t trees;
  double beta;
  int32_t k;
  int32_t replicates;
  int32_t train_size;
  int32_t test_size;
  int32_t min_leaf;
  uint64_t seed;
  int32_t threads;
  int32_t timings;     /* nonzero records real wall times (not reproducible) */
  const char* out_dir; /* NULL -> write no files */
  int32_t write_csv;   /* <out_dir>/replicates.csv */
  int32_t write_json;  /* <out_dir>/summary.json */
} ncp_bench_config;

typedef struct ncp_bench_summary {
  double ave_mean_width;
  double sd_of_average;
  double ave_mean_coverage;
  int64_t flagged_replicates; /* replicates with an infinite-width set */
} ncp_bench_summary;

NCP_API void ncp_bench_config_init(ncp_bench_config* config);

NCP_API ncp_status ncp_bench_run(const ncp_bench_config* config, ncp_bench_summary* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* NCP_H */
