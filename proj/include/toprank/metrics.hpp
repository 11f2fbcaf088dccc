#pragma once

#include <string>
#include <vector>

#include "toprank/common.hpp"

namespace toprank {

struct ScoredSet {
  std::vector<double> pos_scores;
  std::vector<double> neg_scores;
};

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

struct PrPoint {
  double threshold;
  double recall;
  double precision;
};

struct EvalReport {
  double pos_at_top = 0.0;
  double roc_auc = 0.0;
  double pr_auc = 0.0;
  std::vector<RocPoint> roc_points;
  std::vector<PrPoint> pr_points;
};

/// Fraction of positives scoring strictly above every negative. A positive
/// tying the top negative is not counted.
double pos_at_top(const ScoredSet& s);

/// Mann-Whitney statistic: P(pos > neg) with half credit for ties. Equals
/// pairwise enumeration exactly (midrank arithmetic is tie-for-tie the same).
double roc_auc(const ScoredSet& s);

/// Average precision over descending unique thresholds, ties grouped.
double pr_auc(const ScoredSet& s);

/// One point per unique threshold, descending. The ROC curve starts with an
/// extra (inf, 0, 0) point just above the maximum score, so an FPR = 0 point
/// always exists.
void curve_points(const ScoredSet& s, std::vector<RocPoint>& roc,
                  std::vector<PrPoint>& pr);

EvalReport evaluate_scores(const ScoredSet& s);

// CSV export, one row per unique threshold, full round-trip precision.
void write_roc_csv(const std::vector<RocPoint>& points, const std::string& path);
void write_pr_csv(const std::vector<PrPoint>& points, const std::string& path);

}  // namespace toprank
