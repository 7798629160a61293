#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "plain/dataset.hpp"
#include "plain/metrics.hpp"
#include "plain/network.hpp"
#include "plain/trainer.hpp"

namespace plain {

struct ExperimentConfig {
  std::string data_path;
  VariantKind variant = VariantKind::PLAIN;

  // graph
  int k = 10;
  double rho = 3.0;
  bool label_graph_self_loops = false;

  // propagation
  double alpha = 0.01;
  double beta = 0.01;
  double eta = 1.0;
  double gamma = 0.01;
  int steps = -1;  // -1: 200 below 50k examples, 50 otherwise
  bool normalize = true;

  // network
  std::string loss = "bce";
  double learning_rate = 0.01;
  double weight_decay = 5e-5;
  int batch_size = 128;
  int epochs = 100;
  bool mse_on_logits = true;
  bool propagate_on_logits = false;
  bool full_batch = false;

  // experiment
  int folds = 10;
  std::uint64_t seed = 1;
  int r = 0;  // false positives to inject; 0 = use the file as-is
  bool resample_per_fold = false;
  int jobs = 1;
  bool track_metrics = false;  // per-epoch test metrics in curves.csv
  bool dump_graphs = false;
  bool allow_off_grid = false;
  std::string out_dir = "results";

  void validate() const;
  int resolved_steps(Index n) const;
};

struct StageTimings {
  double graph_build_s = 0.0;
  double propagation_total_s = 0.0;
  double training_total_s = 0.0;
};

struct FoldResult {
  int fold = 0;
  EvalReport report;
};

struct RunResult {
  std::vector<FoldResult> per_fold;
  EvalReport mean;
  EvalReport stddev;  // across folds
  StageTimings timings;
};

RunResult aggregate(const std::vector<FoldResult>& folds);

/// Corrupts a clean multi-label file into a partial multi-label file and
/// prints injected-label statistics.
void cmd_synth(const std::filesystem::path& in_path,
               const std::filesystem::path& out_path, int r,
               std::uint64_t seed);

/// K-fold cross-validation; writes results.json and curves.csv under
/// cfg.out_dir. Completed folds are kept on disk when a later fold fails.
RunResult cmd_cv(const ExperimentConfig& cfg);

struct AblationResult {
  std::vector<std::pair<VariantKind, RunResult>> runs;
};

/// PLAIN plus the three reduced variants on shared folds and seed.
AblationResult cmd_ablate(const ExperimentConfig& cfg);

struct TimingRow {
  std::string dataset;
  Index n = 0, d = 0, L = 0;
  double graph_build_s = 0.0;
  double propagation_epoch_s = 0.0;
  double training_epoch_s = 0.0;
};

/// Measures graph build, one propagation epoch and one training epoch.
TimingRow cmd_timing(const ExperimentConfig& cfg);

struct GridResult {
  double alpha = 0.0, beta = 0.0, eta = 0.0;
  double validation_ap = 0.0;
  std::vector<std::tuple<double, double, double, double>> table;  // a, b, eta, ap
};

/// Searches alpha, beta in {0.001, 0.01, 0.1} and eta in {0.1, 1, 10} by
/// average precision on an inner validation split of the training data.
GridResult cmd_grid(const ExperimentConfig& cfg);

/// Single train/test run with a held-out fold; writes curves.csv, metrics and
/// a parameter checkpoint.
EvalReport cmd_train(const ExperimentConfig& cfg, int holdout_fold = 0);

}  // namespace plain
