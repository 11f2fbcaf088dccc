#include "toprank/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "toprank/detail/text_io.hpp"

namespace toprank {

int Dataset::count(Label l) const {
  int c = 0;
  for (const auto& s : samples)
    if (s.label == l) ++c;
  return c;
}

std::vector<int> Dataset::indices_of(Label l) const {
  std::vector<int> out;
  for (size_t i = 0; i < samples.size(); ++i)
    if (samples[i].label == l) out.push_back(static_cast<int>(i));
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);

  Dataset ds;
  std::string line;
  int row = 0;
  int next_id = 0;
  bool any_data = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row == 1 && line.rfind("label,", 0) == 0) continue;  // header

    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() < 2)
      throw DataError(path + ": row " + std::to_string(row) +
                      ": expected `label,f1,...`, got " +
                      std::to_string(fields.size()) + " field(s)");

    Sample s;
    s.id = next_id;
    if (fields[0] == "1")
      s.label = Label::Positive;
    else if (fields[0] == "0")
      s.label = Label::Negative;
    else
      throw DataError(path + ": row " + std::to_string(row) +
                      ": unknown label '" + fields[0] +
                      "' (labels must be dichotomized to 0/1)");

    s.features.reserve(fields.size() - 1);
    for (size_t f = 1; f < fields.size(); ++f) {
      double v;
      if (!detail::parse_double(fields[f], v) || !std::isfinite(v))
        throw DataError(path + ": row " + std::to_string(row) + ", field " +
                        std::to_string(f + 1) + ": not a finite number: '" +
                        fields[f] + "'");
      s.features.push_back(v);
    }

    if (!any_data) {
      ds.dim = static_cast<int>(s.features.size());
      any_data = true;
    } else if (static_cast<int>(s.features.size()) != ds.dim) {
      throw DataError(path + ": row " + std::to_string(row) + ": has " +
                      std::to_string(s.features.size()) +
                      " features, expected " + std::to_string(ds.dim));
    }
    ds.samples.push_back(std::move(s));
    ++next_id;
  }
  if (!any_data) throw DataError(path + ": no data rows");
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "label";
  for (int i = 1; i <= ds.dim; ++i) out << ",f" << i;
  out << '\n';
  for (const auto& s : ds.samples) {
    out << (s.label == Label::Positive ? '1' : '0');
    for (double v : s.features) out << ',' << detail::format_double(v);
    out << '\n';
  }
  if (!out) throw DataError("failed writing: " + path);
}

FoldPlan stratified_folds(const Dataset& ds, int k, uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_folds: k must be >= 2");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  Rng rng(derive_seed(seed, {0x666f6c64}));  // fold-assignment stream
  for (Label l : {Label::Positive, Label::Negative}) {
    std::vector<int> idx = ds.indices_of(l);
    if (static_cast<int>(idx.size()) < k)
      throw std::invalid_argument(
          "stratified_folds: class with " + std::to_string(idx.size()) +
          " samples cannot be split into " + std::to_string(k) + " folds");
    rng.shuffle(idx);
    for (size_t i = 0; i < idx.size(); ++i)
      plan.assignment[ds.samples[static_cast<size_t>(idx[i])].id] =
          static_cast<int>(i % static_cast<size_t>(k));
  }
  return plan;
}

Batch sample_batch(const Dataset& ds, int n_pos, int n_neg, Rng& rng) {
  Batch batch;
  for (auto [label, want, out] :
       {std::tuple{Label::Positive, n_pos, &batch.pos_indices},
        std::tuple{Label::Negative, n_neg, &batch.neg_indices}}) {
    std::vector<int> idx = ds.indices_of(label);
    if (static_cast<int>(idx.size()) < want)
      throw std::invalid_argument("sample_batch: requested " +
                                  std::to_string(want) + " of class with " +
                                  std::to_string(idx.size()) + " samples");
    // Partial Fisher-Yates: the first `want` entries are a uniform draw
    // without replacement.
    for (int i = 0; i < want; ++i) {
      const size_t j =
          static_cast<size_t>(i) +
          static_cast<size_t>(rng.bounded(idx.size() - static_cast<size_t>(i)));
      std::swap(idx[static_cast<size_t>(i)], idx[j]);
    }
    out->assign(idx.begin(), idx.begin() + want);
  }
  return batch;
}

SynthData synth_generate(const SynthConfig& cfg) {
  if (cfg.n_pos < 1 || cfg.n_neg < 1 || cfg.dim < 1)
    throw std::invalid_argument("synth_generate: counts and dim must be >= 1");
  if (!(cfg.separation > 0.0))
    throw std::invalid_argument("synth_generate: separation must be > 0");
  if (cfg.outlier_rate < 0.0 || cfg.outlier_rate >= 1.0)
    throw std::invalid_argument("synth_generate: outlier_rate must be in [0,1)");

  SynthData out;
  Rng rng(derive_seed(cfg.seed, {0x73796e7468}));

  // mu- = 0, mu+ = separation * e1; unit isotropic noise around both.
  auto draw = [&](Dataset& ds, int n_pos, int n_neg) {
    ds.dim = cfg.dim;
    int id = 0;
    for (int i = 0; i < n_pos + n_neg; ++i) {
      Sample s;
      s.id = id++;
      s.label = i < n_pos ? Label::Positive : Label::Negative;
      s.features.resize(static_cast<size_t>(cfg.dim));
      for (double& v : s.features) v = rng.normal();
      if (s.label == Label::Positive) s.features[0] += cfg.separation;
      ds.samples.push_back(std::move(s));
    }
  };
  draw(out.train, cfg.n_pos, cfg.n_neg);
  draw(out.test, cfg.n_pos, cfg.n_neg);

  // Displace the first round(rate*n) shuffled train negatives toward mu+.
  const int n_inject = static_cast<int>(
      std::llround(cfg.outlier_rate * static_cast<double>(cfg.n_neg)));
  if (n_inject > 0) {
    std::vector<int> neg_idx = out.train.indices_of(Label::Negative);
    rng.shuffle(neg_idx);
    for (int i = 0; i < n_inject; ++i) {
      Sample& s = out.train.samples[static_cast<size_t>(neg_idx[static_cast<size_t>(i)])];
      s.features[0] += cfg.outlier_shift;
      out.outlier_ids.push_back(s.id);
    }
    std::sort(out.outlier_ids.begin(), out.outlier_ids.end());
  }
  return out;
}

void write_outlier_ids_csv(const Dataset& train,
                           const std::vector<int>& outlier_ids,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "id,is_injected\n";
  for (const auto& s : train.samples) {
    const bool injected =
        std::binary_search(outlier_ids.begin(), outlier_ids.end(), s.id);
    out << s.id << ',' << (injected ? 1 : 0) << '\n';
  }
  if (!out) throw DataError("failed writing: " + path);
}

InputScaler fit_scaler(const Dataset& ds) {
  if (ds.samples.empty())
    throw std::invalid_argument("fit_scaler: empty dataset");
  const size_t d = static_cast<size_t>(ds.dim);
  InputScaler scaler;
  scaler.mean.assign(d, 0.0);
  scaler.scale.assign(d, 1.0);
  const double n = static_cast<double>(ds.samples.size());
  for (const auto& s : ds.samples)
    for (size_t i = 0; i < d; ++i) scaler.mean[i] += s.features[i];
  for (double& mu : scaler.mean) mu /= n;
  std::vector<double> var(d, 0.0);
  for (const auto& s : ds.samples)
    for (size_t i = 0; i < d; ++i) {
      const double c = s.features[i] - scaler.mean[i];
      var[i] += c * c;
    }
  for (size_t i = 0; i < d; ++i) {
    const double sd = std::sqrt(var[i] / n);
    scaler.scale[i] = sd > 0.0 ? 1.0 / sd : 1.0;
  }
  return scaler;
}

Dataset apply_scaler(const InputScaler& scaler, const Dataset& ds) {
  Dataset out;
  out.dim = ds.dim;
  out.samples.reserve(ds.samples.size());
  for (const auto& s : ds.samples)
    out.samples.push_back({s.id, s.label, scaler.apply(s.features)});
  return out;
}

Dataset subset(const Dataset& ds, const std::vector<int>& indices) {
  Dataset out;
  out.dim = ds.dim;
  out.samples.reserve(indices.size());
  for (int i : indices) out.samples.push_back(ds.samples[static_cast<size_t>(i)]);
  return out;
}

}  // namespace toprank
