#pragma once

#include <string>
#include <vector>

#include "toprank/data.hpp"
#include "toprank/training.hpp"

namespace toprank {

/// Outlier-injection study: regenerate the two-Gaussian data under `repeats`
/// seeds, train every requested variant on each draw, evaluate on the clean
/// test split.
struct ExperimentConfig {
  SynthConfig synth;  // synth.seed is the master seed for all repeats
  TrainConfig base;   // shared hyperparameters; variant is overridden per run
  std::vector<LossVariant> variants = {LossVariant::Top, LossVariant::TopRej,
                                       LossVariant::TopLOF,
                                       LossVariant::TopRejLOF};
  int repeats = 5;
  int jobs = 1;
};

struct RejectWeightRow {
  int id = 0;          // train sample id (a negative)
  bool injected = false;
  double weight = 0.0; // final rejection weight r(x)
};

struct ExperimentRun {
  LossVariant variant = LossVariant::Top;
  int repeat = 0;
  EvalReport test_report;
  std::vector<RejectWeightRow> reject_weights;  // rejecting variants only
};

struct ExperimentTableRow {
  LossVariant variant = LossVariant::Top;
  MetricStats pos_at_top;
  MetricStats roc_auc;
  MetricStats pr_auc;
};

struct ExperimentResult {
  std::vector<ExperimentRun> runs;  // repeat-major, variant order preserved
  std::vector<ExperimentTableRow> table;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes the experiment artifacts under out_dir: per-run summary.csv, the
/// aggregate table.csv (one row per variant, mean and variance per metric),
/// rejection_weights.csv, per-variant ROC/PR curve CSVs for the first
/// repeat, and the first repeat's datasets with the injected-id sidecar.
void write_experiment_outputs(const ExperimentConfig& cfg,
                              const ExperimentResult& result,
                              const std::string& out_dir);

}  // namespace toprank
