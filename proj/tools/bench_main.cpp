// Benchmark CLI. Talks to the library exclusively through the C API.

#include <cinttypes>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "ncp/ncp.h"

namespace {

int run_command(const ncp_bench_config& config, const std::string& format, const std::string& out_dir) {
  ncp_bench_config cfg = config;
  cfg.out_dir = out_dir.c_str();
  cfg.write_csv = (format == "csv" || format == "both") ? 1 : 0;
  cfg.write_json = (format == "json" || format == "both") ? 1 : 0;

  ncp_bench_summary summary{};
  ncp_status status = ncp_bench_run(&cfg, &summary);
  if (status != NCP_OK) {
    std::fprintf(stderr, "error: %s\n", ncp_last_error());
    return 1;
  }

  std::printf("method=%s replicates=%d ave_mean_width=%.6g sd_of_average=%.6g ave_mean_coverage=%.6g\n",
              cfg.method, cfg.replicates, summary.ave_mean_width, summary.sd_of_average,
              summary.ave_mean_coverage);
  if (summary.flagged_replicates > 0) {
    std::printf("warning: %" PRId64 " replicate(s) produced an infinite-width set\n",
                summary.flagged_replicates);
  }
  if (cfg.write_csv) std::printf("wrote %s/replicates.csv\n", out_dir.c_str());
  if (cfg.write_json) std::printf("wrote %s/summary.json\n", out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nested conformal prediction benchmark harness"};
  app.set_config("--config", "", "Read options from an INI/TOML file (CLI flags override)");
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the replicate protocol for one method");

  std::string dataset;
  std::int64_t synthetic_n = 0;
  std::string method = "qoob";
  double alpha = 0.1;
  int trees = 100;
  double beta = 0.0;
  int k = 8;
  int replicates = 1;
  int train_size = 768;
  int test_size = 232;
  int min_leaf = 5;
  std::uint64_t seed = 1;
  int threads = 0;
  bool timings = false;
  std::string out_dir = ".";
  std::string format = "both";

  auto* dataset_opt = run->add_option("--dataset", dataset, "CSV pool (numeric, header, target last)");
  auto* synth_opt = run->add_option("--synthetic", synthetic_n, "Generate a synthetic pool of this size");
  dataset_opt->excludes(synth_opt);
  run->add_option("--method", method, "Conformal method")
      ->check(CLI::IsMember({"sc", "split-cqr", "kfold-cc", "oob-cc", "oob-ncc", "qoob", "qoob-jp",
                             "qoob-conv", "subsample-agg", "bootstrap-agg"}));
  run->add_option("--alpha", alpha, "Miscoverage level")->check(CLI::Range(1e-6, 1.0 - 1e-6));
  run->add_option("--trees", trees, "Trees per forest")->check(CLI::PositiveNumber);
  run->add_option("--beta", beta, "Nominal quantile level (0 -> 2*alpha)");
  run->add_option("--k", k, "Folds (kfold-cc) or resamples (agg methods)");
  run->add_option("--replicates", replicates, "Replicates")->check(CLI::PositiveNumber);
  run->add_option("--train", train_size, "Training points per replicate");
  run->add_option("--test", test_size, "Test points per replicate");
  run->add_option("--min-leaf", min_leaf, "Minimum leaf size");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--threads", threads, "Worker threads (0 = all cores); never changes results");
  run->add_flag("--timings", timings, "Record real wall times (breaks byte-identical output)");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--format", format, "Report files to write")
      ->check(CLI::IsMember({"csv", "json", "both"}));

  CLI11_PARSE(app, argc, argv);

  ncp_bench_config cfg;
  ncp_bench_config_init(&cfg);
  cfg.dataset_path = dataset.empty() ? nullptr : dataset.c_str();
  cfg.synthetic_n = synthetic_n;
  cfg.method = method.c_str();
  cfg.alpha = alpha;
  cfg.trees = trees;
  cfg.beta = beta;
  cfg.k = k;
  cfg.replicates = replicates;
  cfg.train_size = train_size;
  cfg.test_size = test_size;
  cfg.min_leaf = min_leaf;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.timings = timings ? 1 : 0;

  return run_command(cfg, format, out_dir);
}
