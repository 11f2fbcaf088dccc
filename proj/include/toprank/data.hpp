#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "toprank/common.hpp"
#include "toprank/net.hpp"
#include "toprank/rng.hpp"

namespace toprank {

enum class Label { Negative = 0, Positive = 1 };

struct Sample {
  int id = 0;
  Label label = Label::Negative;
  FeatureVector features;
};

struct Dataset {
  std::vector<Sample> samples;
  int dim = 0;

  int count(Label l) const;
  std::vector<int> indices_of(Label l) const;  // positions in samples
};

/// Rows are `label,f1,...,fD` with label 0 or 1; an optional header line
/// starting with `label,` is skipped. Ids are assigned by row order.
/// Malformed input raises DataError naming the offending row.
Dataset load_csv(const std::string& path);

/// Inverse of load_csv: header plus one row per sample, features at full
/// round-trip precision.
void save_csv(const Dataset& ds, const std::string& path);

struct FoldPlan {
  int k = 0;
  uint64_t seed = 0;
  std::unordered_map<int, int> assignment;  // sample id -> fold index

  int fold_of(int id) const { return assignment.at(id); }
};

/// Seeded stratified partition: per-fold class counts differ from exact
/// proportionality by at most one sample. Requires k >= 2 and at least k
/// samples per class.
FoldPlan stratified_folds(const Dataset& ds, int k, uint64_t seed);

struct Batch {
  std::vector<int> pos_indices;  // positions in Dataset::samples
  std::vector<int> neg_indices;
};

/// Uniform draw without replacement within the batch; consecutive calls on
/// the same rng give independent batches.
Batch sample_batch(const Dataset& ds, int n_pos, int n_neg, Rng& rng);

struct SynthConfig {
  int n_pos = 300;
  int n_neg = 300;
  int dim = 10;
  double separation = 3.0;    // |mu+ - mu-| in units of the unit stddev
  double outlier_rate = 0.0;  // fraction of train negatives displaced
  double outlier_shift = 3.0; // displacement along mu- -> mu+
  uint64_t seed = 1;
};

struct SynthData {
  Dataset train;
  Dataset test;
  std::vector<int> outlier_ids;  // train ids of injected negatives
};

/// Two-Gaussian generator: positives ~ N(separation*e1, I), negatives ~
/// N(0, I). round(outlier_rate*n_neg) train negatives are displaced by
/// outlier_shift along e1; the test split never contains injected outliers.
SynthData synth_generate(const SynthConfig& cfg);

/// Sidecar CSV `id,is_injected`, one row per train sample.
void write_outlier_ids_csv(const Dataset& train,
                           const std::vector<int>& outlier_ids,
                           const std::string& path);

/// Per-dimension standardizer fitted on ds (population stddev; constant
/// dimensions get scale 1).
InputScaler fit_scaler(const Dataset& ds);
Dataset apply_scaler(const InputScaler& scaler, const Dataset& ds);

/// New dataset holding the samples at the given positions, ids preserved.
Dataset subset(const Dataset& ds, const std::vector<int>& indices);

}  // namespace toprank
