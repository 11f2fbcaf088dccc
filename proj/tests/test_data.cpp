#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "toprank/data.hpp"
#include "toprank/metrics.hpp"

using namespace toprank;

namespace {

std::string tmp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

Dataset random_dataset(int n_pos, int n_neg, int dim, uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.dim = dim;
  for (int i = 0; i < n_pos + n_neg; ++i) {
    Sample s;
    s.id = i;
    s.label = i < n_pos ? Label::Positive : Label::Negative;
    s.features.resize(static_cast<size_t>(dim));
    for (double& v : s.features) v = rng.normal();
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace

TEST_CASE("load_csv parses rows and infers dimension") {
  const std::string path = tmp_file("toprank_basic.csv");
  write_text(path, "1,0.5,0.2\n0,0.1,0.9\n");
  const Dataset ds = load_csv(path);
  CHECK(ds.dim == 2);
  CHECK(ds.count(Label::Positive) == 1);
  CHECK(ds.count(Label::Negative) == 1);
  CHECK(ds.samples[0].features == FeatureVector{0.5, 0.2});
  CHECK(ds.samples[0].id == 0);
  CHECK(ds.samples[1].id == 1);
  std::remove(path.c_str());
}

TEST_CASE("load_csv skips an optional header line") {
  const std::string path = tmp_file("toprank_header.csv");
  write_text(path, "label,f1,f2\n1,1.0,2.0\n0,3.0,4.0\n");
  const Dataset ds = load_csv(path);
  CHECK(ds.samples.size() == 2);
  CHECK(ds.dim == 2);
  std::remove(path.c_str());
}

TEST_CASE("load_csv error reporting names the offending row") {
  const std::string path = tmp_file("toprank_bad.csv");

  write_text(path, "1,0.5,0.2\n0,0.1,0.9,0.3\n");
  CHECK_THROWS_WITH_AS(load_csv(path),
                       doctest::Contains("row 2"), DataError);

  write_text(path, "1,0.5\n2,0.1\n");
  CHECK_THROWS_WITH_AS(load_csv(path),
                       doctest::Contains("unknown label"), DataError);

  write_text(path, "1,0.5\n0,abc\n");
  CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("row 2"), DataError);

  write_text(path, "");
  CHECK_THROWS_AS(load_csv(path), DataError);

  CHECK_THROWS_WITH_AS(load_csv("/no/such/file.csv"),
                       doctest::Contains("/no/such/file.csv"), DataError);
  std::remove(path.c_str());
}

TEST_CASE("save then load is the identity on features, labels, and order") {
  const Dataset ds = random_dataset(7, 9, 4, 123);
  const std::string path = tmp_file("toprank_roundtrip.csv");
  save_csv(ds, path);
  const Dataset back = load_csv(path);
  REQUIRE(back.samples.size() == ds.samples.size());
  CHECK(back.dim == ds.dim);
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    CHECK(back.samples[i].id == ds.samples[i].id);
    CHECK(back.samples[i].label == ds.samples[i].label);
    CHECK(back.samples[i].features == ds.samples[i].features);  // bit-exact
  }
  std::remove(path.c_str());
}

TEST_CASE("stratified_folds: exact divisibility gives one of each per fold") {
  const Dataset ds = random_dataset(10, 10, 2, 5);
  const FoldPlan plan = stratified_folds(ds, 10, 42);
  for (int f = 0; f < 10; ++f) {
    int pos = 0, neg = 0;
    for (const auto& s : ds.samples)
      if (plan.fold_of(s.id) == f)
        (s.label == Label::Positive ? pos : neg)++;
    CHECK(pos == 1);
    CHECK(neg == 1);
  }
}

TEST_CASE("stratified_folds: determinism, coverage, and stratification") {
  const Dataset ds = random_dataset(95, 105, 3, 6);
  const FoldPlan a = stratified_folds(ds, 10, 42);
  const FoldPlan b = stratified_folds(ds, 10, 42);
  CHECK(a.assignment == b.assignment);

  // every id assigned exactly once, folds in range
  CHECK(a.assignment.size() == ds.samples.size());
  for (const auto& s : ds.samples) {
    const int f = a.fold_of(s.id);
    CHECK(f >= 0);
    CHECK(f < 10);
  }
  // 95 positives over 10 folds: 9 or 10 each; 105 negatives: 10 or 11
  for (int f = 0; f < 10; ++f) {
    int pos = 0, neg = 0;
    for (const auto& s : ds.samples)
      if (a.fold_of(s.id) == f)
        (s.label == Label::Positive ? pos : neg)++;
    CHECK((pos == 9 || pos == 10));
    CHECK((neg == 10 || neg == 11));
  }

  const FoldPlan c = stratified_folds(ds, 10, 43);
  CHECK(a.assignment != c.assignment);

  CHECK_THROWS_AS(stratified_folds(random_dataset(5, 50, 2, 7), 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(stratified_folds(ds, 1, 1), std::invalid_argument);
}

TEST_CASE("sample_batch draws without replacement, deterministically") {
  const Dataset ds = random_dataset(20, 60, 3, 8);
  Rng rng(9);
  const Batch batch = sample_batch(ds, 5, 45, rng);
  CHECK(batch.pos_indices.size() == 5);
  CHECK(batch.neg_indices.size() == 45);
  const std::set<int> unique_neg(batch.neg_indices.begin(),
                                 batch.neg_indices.end());
  CHECK(unique_neg.size() == 45);
  for (int i : batch.pos_indices)
    CHECK(ds.samples[static_cast<size_t>(i)].label == Label::Positive);
  for (int j : batch.neg_indices)
    CHECK(ds.samples[static_cast<size_t>(j)].label == Label::Negative);

  // full-class draw is exhaustive
  Rng rng2(10);
  const Batch all_pos = sample_batch(ds, 20, 1, rng2);
  std::set<int> seen(all_pos.pos_indices.begin(), all_pos.pos_indices.end());
  CHECK(seen.size() == 20);

  // identical seed, identical sequence
  Rng r1(77), r2(77);
  for (int step = 0; step < 5; ++step) {
    const Batch b1 = sample_batch(ds, 5, 45, r1);
    const Batch b2 = sample_batch(ds, 5, 45, r2);
    CHECK(b1.pos_indices == b2.pos_indices);
    CHECK(b1.neg_indices == b2.neg_indices);
  }

  Rng rng3(11);
  CHECK_THROWS_AS(sample_batch(ds, 21, 5, rng3), std::invalid_argument);
}

TEST_CASE("synth_generate: counting, determinism, and injection bookkeeping") {
  SynthConfig cfg;
  cfg.n_pos = 100;
  cfg.n_neg = 200;
  cfg.dim = 6;
  cfg.separation = 3.0;
  cfg.outlier_rate = 0.05;
  cfg.outlier_shift = 3.0;
  cfg.seed = 31;
  const SynthData a = synth_generate(cfg);
  CHECK(a.train.count(Label::Positive) == 100);
  CHECK(a.train.count(Label::Negative) == 200);
  CHECK(a.test.samples.size() == 300);
  CHECK(a.outlier_ids.size() == 10);  // round(0.05 * 200)

  // injected ids are train negatives
  for (int id : a.outlier_ids) {
    const auto& s = a.train.samples[static_cast<size_t>(id)];
    CHECK(s.id == id);
    CHECK(s.label == Label::Negative);
    CHECK(s.features[0] > 0.0);  // shifted toward the positive mode
  }

  const SynthData b = synth_generate(cfg);
  CHECK(a.outlier_ids == b.outlier_ids);
  for (size_t i = 0; i < a.train.samples.size(); ++i)
    CHECK(a.train.samples[i].features == b.train.samples[i].features);
  for (size_t i = 0; i < a.test.samples.size(); ++i)
    CHECK(a.test.samples[i].features == b.test.samples[i].features);

  cfg.outlier_rate = 0.0;
  CHECK(synth_generate(cfg).outlier_ids.empty());

  cfg.outlier_rate = 1.5;
  CHECK_THROWS_AS(synth_generate(cfg), std::invalid_argument);
}

TEST_CASE("wide separation makes a linear scorer reach pos@top > 0.9") {
  SynthConfig cfg;
  cfg.n_pos = 150;
  cfg.n_neg = 150;
  cfg.dim = 5;
  cfg.separation = 6.0;
  cfg.outlier_rate = 0.0;
  cfg.seed = 99;
  const SynthData data = synth_generate(cfg);
  ScoredSet scored;
  for (const auto& s : data.test.samples)
    (s.label == Label::Positive ? scored.pos_scores : scored.neg_scores)
        .push_back(s.features[0]);  // project on the class axis
  CHECK(pos_at_top(scored) > 0.9);
}

TEST_CASE("outlier sidecar lists every train sample with its flag") {
  SynthConfig cfg;
  cfg.n_pos = 20;
  cfg.n_neg = 40;
  cfg.dim = 2;
  cfg.outlier_rate = 0.1;
  cfg.seed = 13;
  const SynthData data = synth_generate(cfg);
  const std::string path = tmp_file("toprank_outliers.csv");
  write_outlier_ids_csv(data.train, data.outlier_ids, path);

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "id,is_injected");
  int rows = 0, flagged = 0;
  while (std::getline(in, line)) {
    int id, flag;
    REQUIRE(std::sscanf(line.c_str(), "%d,%d", &id, &flag) == 2);
    flagged += flag;
    ++rows;
  }
  CHECK(rows == 60);
  CHECK(flagged == 4);  // round(0.1 * 40)
  std::remove(path.c_str());
}

TEST_CASE("scaler standardizes train statistics and is shape-safe") {
  const Dataset ds = random_dataset(50, 50, 3, 21);
  const InputScaler scaler = fit_scaler(ds);
  const Dataset std_ds = apply_scaler(scaler, ds);
  for (int dimn = 0; dimn < 3; ++dimn) {
    double mean = 0.0, var = 0.0;
    for (const auto& s : std_ds.samples) mean += s.features[static_cast<size_t>(dimn)];
    mean /= static_cast<double>(std_ds.samples.size());
    for (const auto& s : std_ds.samples) {
      const double c = s.features[static_cast<size_t>(dimn)] - mean;
      var += c * c;
    }
    var /= static_cast<double>(std_ds.samples.size());
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-10));
  }

  // constant dimension: scale 1, no NaN
  Dataset flat = ds;
  for (auto& s : flat.samples) s.features[1] = 7.0;
  const InputScaler fs = fit_scaler(flat);
  CHECK(fs.scale[1] == 1.0);
  const Dataset out = apply_scaler(fs, flat);
  for (const auto& s : out.samples) CHECK(s.features[1] == 0.0);
}
