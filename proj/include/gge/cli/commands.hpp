#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gge/cli/run_config.hpp"
#include "gge/ensemble/trainer.hpp"
#include "gge/metrics/metrics.hpp"

namespace gge::cli {

namespace fs = std::filesystem;

// Writes the three splits plus priors.csv (split, type, answer, mass) and
// priors.txt (per-type head mass). Returns the written paths.
std::vector<fs::path> cmd_gen_data(const RunConfig& config, const fs::path& out_dir);

/// Trains on <data_dir>/train and fills run_dir with
///   config.ini             resolved configuration snapshot
///   losses.csv             epoch plus one column per branch loss
///   checkpoints/<b>.jsonl  final parameters of every branch
///   bias.csv               distribution-bias table, when used
///   run_info.txt           wall time (kept apart so the rest is reproducible)
ensemble::RunRecord cmd_train(const RunConfig& config, const fs::path& data_dir,
                              const fs::path& run_dir);

struct EvalOptions {
  double threshold = metrics::kDefaultThreshold;
  std::optional<std::size_t> cap;  // paired with the threshold when absent
  bool invert_grounding = false;
  bool strict = false;
};

// Base-model predictions of a trained run on a dataset.
std::vector<metrics::PredictionRecord> run_predictions(const fs::path& run_dir,
                                                       const fs::path& dataset_path);

// Scores predictions (from run_predictions or an external dump) and writes
// <out_stem>.csv and <out_stem>.txt.
metrics::MetricsReport cmd_eval(const std::vector<metrics::PredictionRecord>& records,
                                const EvalOptions& options, const fs::path& out_stem);

// One row per threshold in metrics::kSweepThresholds, each with its paired cap.
std::vector<metrics::SweepRow> cmd_sweep(const std::vector<metrics::PredictionRecord>& records,
                                         const EvalOptions& options, const fs::path& out_stem);

struct AblationCell {
  std::string run;
  std::uint64_t seed = 0;
  double ood_accuracy = 0.0;
  double id_accuracy = 0.0;
  double ood_cgd = 0.0;
  double id_cgd = 0.0;
  double ood_cgd_inverted = 0.0;
};

struct AblationSummary {
  std::string run;
  std::size_t seeds = 0;
  double ood_mean = 0.0, ood_std = 0.0;
  double id_mean = 0.0, id_std = 0.0;
  double cgd_mean = 0.0, cgd_std = 0.0;
};

/// Trains every run label on `seeds` replicates. Replicate i uses generator
/// seed and training seed base + i, so each replicate is a fresh benchmark
/// draw. Jobs run on `jobs` threads with no shared mutable state; results come
/// back in (run, seed) order regardless. A failure names the run and seed.
std::vector<AblationCell> run_ablation(const RunConfig& config,
                                       const std::vector<std::string>& runs, std::size_t seeds,
                                       std::size_t jobs);

// Sample standard deviation (n - 1); 0 for a single seed.
std::vector<AblationSummary> summarize_ablation(const std::vector<AblationCell>& cells,
                                                const std::vector<std::string>& runs);

// Writes ablation_runs.csv, ablation.csv and ablation.txt under out_dir.
std::vector<AblationSummary> cmd_ablate(const RunConfig& config, const fs::path& out_dir);

std::string ablation_table(const std::vector<AblationSummary>& rows);

// Renders every report, sweep and ablation CSV found in `dir` as text tables.
std::string cmd_report(const fs::path& dir);

}  // namespace gge::cli
