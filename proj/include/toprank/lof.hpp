#pragma once

#include <vector>

#include "toprank/common.hpp"

namespace toprank {

struct LofConfig {
  int k = 20;       // neighborhood size, must be < number of points
  double d = 100.0; // weakening exponent of the weight transform
};

struct LofReport {
  std::vector<double> lof;      // > 0
  std::vector<double> weights;  // (1/max(lof,1))^d, in (0,1]
};

/// Local Outlier Factor of every point (Euclidean metric). Neighborhoods are
/// the first k points by (distance, index); the lrd denominator is clamped
/// at 1e-12 so duplicate points come out at LOF = 1.
std::vector<double> lof_scores(const std::vector<FeatureVector>& points, int k);

/// Same contract as lof_scores through a direct O(n^2) full-sort path; kept
/// as an independent cross-check of the primary implementation.
std::vector<double> lof_scores_bruteforce(const std::vector<FeatureVector>& points,
                                          int k);

/// (1 / max(lof, 1))^d. Equal to 1 whenever lof <= 1.
double lof_weight(double lof, double d);

LofReport lof_report(const std::vector<FeatureVector>& points,
                     const LofConfig& cfg);

}  // namespace toprank
