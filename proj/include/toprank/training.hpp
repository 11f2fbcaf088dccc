#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "toprank/data.hpp"
#include "toprank/lof.hpp"
#include "toprank/losses.hpp"
#include "toprank/metrics.hpp"
#include "toprank/net.hpp"

namespace toprank {

struct TrainConfig {
  LossConfig loss;
  LofConfig lof;  // consulted only when the variant applies LOF weights
  double lr = 0.05;
  double momentum = 0.9;
  int steps = 2000;
  int batch_pos = 5;
  int batch_neg = 45;
  uint64_t seed = 1;
  int hidden_dim = 64;
  bool standardize = false;
};

struct TrainRecord {
  int step = 0;
  double total = 0.0;
  double rank_term = 0.0;
  double penalty_term = 0.0;
  double mean_reject = 0.0;  // over the batch negatives; 1 when not rejecting
};

struct TrainResult {
  Model model;
  std::vector<TrainRecord> records;
};

/// One training run under the sampled-batch protocol: per step, draw
/// batch_pos positives and batch_neg negatives, forward both branches
/// (rejection on negatives only), take one momentum-SGD step on the
/// configured loss. LOF weights are computed once on all train negatives
/// before the loop. Deterministic per seed. Throws NumericError with the
/// step number if the loss diverges.
TrainResult train(const Dataset& train_ds, const TrainConfig& cfg);

/// Scores every sample with the ranking branch only (the rejection branch is
/// never read at test time) and computes the full metric report.
EvalReport evaluate(const Model& model, const Dataset& ds);

void write_records_csv(const std::vector<TrainRecord>& records,
                       const std::string& path);

struct FoldResult {
  int fold = 0;
  TrainConfig chosen;
  EvalReport report;
};

struct MetricStats {
  double mean = 0.0;
  double variance = 0.0;  // population variance over folds
};

struct CVReport {
  std::vector<FoldResult> folds;
  MetricStats pos_at_top;
  MetricStats roc_auc;
  MetricStats pr_auc;
};

/// Outer loop over the fold plan. Per fold, an inner stratified 90/10 split
/// of the training folds selects the grid entry with the best validation
/// pos@top (ties: higher PR-AUC, then lower lr, then grid order); the winner
/// is retrained on the full training folds and evaluated on the held-out
/// fold. Every (fold, grid) job derives its own seed from `seed`, so results
/// are identical whether folds run serially or across `jobs` workers.
CVReport cross_validate(const Dataset& ds, const FoldPlan& folds,
                        const std::vector<TrainConfig>& grid, uint64_t seed,
                        int jobs = 1);

/// Cartesian product of the base config with p and lr values, in (p, lr)
/// order.
std::vector<TrainConfig> make_grid(const TrainConfig& base,
                                   const std::vector<int>& p_values,
                                   const std::vector<double>& lr_values);

/// Flat CSV: fold,variant,pos_at_top,roc_auc,pr_auc.
void write_cv_csv(const CVReport& report, const std::string& path);

/// Structured report: per-fold metrics and chosen hyperparameters plus the
/// aggregate mean/variance block.
void write_cv_json(const CVReport& report, const std::string& path);

}  // namespace toprank
