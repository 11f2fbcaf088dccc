#include "toprank/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "toprank/detail/text_io.hpp"
#include "toprank/parallel.hpp"
#include "toprank/rng.hpp"

namespace toprank {

namespace {

void validate_config(const TrainConfig& cfg) {
  if (cfg.lr <= 0.0) throw std::invalid_argument("train: lr must be > 0");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
    throw std::invalid_argument("train: momentum must be in [0, 1)");
  if (cfg.steps < 0) throw std::invalid_argument("train: steps must be >= 0");
  if (cfg.batch_pos < 1 || cfg.batch_neg < 1)
    throw std::invalid_argument("train: batch sizes must be >= 1");
  if (cfg.hidden_dim < 1)
    throw std::invalid_argument("train: hidden_dim must be >= 1");
  if (cfg.loss.p < 1) throw std::invalid_argument("train: p must be >= 1");
  if (uses_rejection(cfg.loss.variant)) {
    if (!(cfg.loss.c > 0.0 && cfg.loss.c <= 1.0))
      throw std::invalid_argument("train: c must be in (0, 1]");
    if (cfg.loss.lambda < 0.0)
      throw std::invalid_argument("train: lambda must be >= 0");
  }
  if (uses_lof(cfg.loss.variant) && cfg.lof.k < 1)
    throw std::invalid_argument("train: LOF k must be >= 1");
}

}  // namespace

TrainResult train(const Dataset& train_ds, const TrainConfig& cfg) {
  validate_config(cfg);
  const int n_pos = train_ds.count(Label::Positive);
  const int n_neg = train_ds.count(Label::Negative);
  if (n_pos < cfg.batch_pos || n_neg < cfg.batch_neg)
    throw std::invalid_argument(
        "train: dataset has " + std::to_string(n_pos) + " positives / " +
        std::to_string(n_neg) + " negatives, batch needs " +
        std::to_string(cfg.batch_pos) + "/" + std::to_string(cfg.batch_neg));

  const bool rejecting = uses_rejection(cfg.loss.variant);
  const bool lof_weighted = uses_lof(cfg.loss.variant);

  TrainResult result;
  result.model.variant = cfg.loss.variant;

  const Dataset* ds = &train_ds;
  Dataset standardized;
  if (cfg.standardize) {
    result.model.scaler = fit_scaler(train_ds);
    standardized = apply_scaler(*result.model.scaler, train_ds);
    ds = &standardized;
  }

  result.model.params.top = init_branch(
      ds->dim, cfg.hidden_dim, Activation::ReluTop, derive_seed(cfg.seed, {1}));
  if (rejecting) {
    result.model.params.reject =
        init_branch(ds->dim, cfg.hidden_dim, Activation::SigmoidReject,
                    derive_seed(cfg.seed, {2}));
    // Start the rejection output at its penalty-satisfied operating point,
    // r = c. A zero bias would put every weight at 0.5 and the margin
    // penalty's batch-summed bias gradient then drives the sigmoid into
    // saturation within a few momentum steps, freezing the branch before
    // the rank term can tell outliers apart.
    const double c = std::min(cfg.loss.c, 0.999999);
    result.model.params.reject->b2 = std::log(c / (1.0 - c));
  }

  // LOF weights are per-sample constants: computed once on all train
  // negatives, in the same feature space the model sees.
  std::vector<double> lof_weight_of(ds->samples.size(), 1.0);
  if (lof_weighted) {
    const std::vector<int> neg_idx = ds->indices_of(Label::Negative);
    std::vector<FeatureVector> neg_points;
    neg_points.reserve(neg_idx.size());
    for (int i : neg_idx)
      neg_points.push_back(ds->samples[static_cast<size_t>(i)].features);
    const LofReport lof = lof_report(neg_points, cfg.lof);
    for (size_t j = 0; j < neg_idx.size(); ++j)
      lof_weight_of[static_cast<size_t>(neg_idx[j])] = lof.weights[j];
  }

  Rng batch_rng(derive_seed(cfg.seed, {3}));
  SgdState opt_state;
  ModelParams& params = result.model.params;
  result.records.reserve(static_cast<size_t>(cfg.steps));

  for (int step = 0; step < cfg.steps; ++step) {
    try {
      const Batch batch =
          sample_batch(*ds, cfg.batch_pos, cfg.batch_neg, batch_rng);

      BatchOutputs outputs;
      std::vector<BranchCache> top_caches(
          static_cast<size_t>(cfg.batch_pos + cfg.batch_neg));
      std::vector<BranchCache> reject_caches;
      size_t cache_at = 0;
      for (int i : batch.pos_indices)
        outputs.pos_scores.push_back(
            forward_top(params.top, ds->samples[static_cast<size_t>(i)].features,
                        &top_caches[cache_at++]));
      for (int j : batch.neg_indices) {
        const auto& x = ds->samples[static_cast<size_t>(j)].features;
        outputs.neg_scores.push_back(
            forward_top(params.top, x, &top_caches[cache_at++]));
        if (rejecting) {
          BranchCache cache;
          outputs.neg_reject.push_back(forward_reject(*params.reject, x, &cache));
          reject_caches.push_back(std::move(cache));
        }
        if (lof_weighted)
          outputs.neg_lofw.push_back(lof_weight_of[static_cast<size_t>(j)]);
      }

      LossGrads grads;
      const LossValue loss = loss_and_grads(outputs, cfg.loss, &grads);
      if (!std::isfinite(loss.total)) throw NumericError("loss is non-finite");

      std::vector<double> d_score(grads.d_pos_scores);
      d_score.insert(d_score.end(), grads.d_neg_scores.begin(),
                     grads.d_neg_scores.end());
      const ParamGrads pgrads = backward(params, top_caches, d_score,
                                         reject_caches, grads.d_neg_reject);
      sgd_step(params, pgrads, cfg.lr, cfg.momentum, opt_state);

      double mean_reject = 1.0;
      if (rejecting) {
        mean_reject = 0.0;
        for (double r : outputs.neg_reject) mean_reject += r;
        mean_reject /= static_cast<double>(outputs.neg_reject.size());
      }
      result.records.push_back(
          {step, loss.total, loss.rank_term, loss.penalty_term, mean_reject});
    } catch (const NumericError& e) {
      throw NumericError("train: diverged at step " + std::to_string(step) +
                         ": " + e.what());
    }
  }
  return result;
}

EvalReport evaluate(const Model& model, const Dataset& ds) {
  if (ds.dim != model.params.top.in_dim)
    throw std::invalid_argument(
        "evaluate: dataset dimension " + std::to_string(ds.dim) +
        " does not match model input dimension " +
        std::to_string(model.params.top.in_dim));
  ScoredSet scored;
  for (const auto& s : ds.samples) {
    const double t = model.scaler
                         ? forward_top(model.params.top, model.scaler->apply(s.features))
                         : forward_top(model.params.top, s.features);
    (s.label == Label::Positive ? scored.pos_scores : scored.neg_scores)
        .push_back(t);
  }
  return evaluate_scores(scored);
}

void write_records_csv(const std::vector<TrainRecord>& records,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "step,total,rank,penalty,mean_reject\n";
  for (const auto& r : records)
    out << r.step << ',' << detail::format_double(r.total) << ','
        << detail::format_double(r.rank_term) << ','
        << detail::format_double(r.penalty_term) << ','
        << detail::format_double(r.mean_reject) << '\n';
  if (!out) throw DataError("failed writing: " + path);
}

std::vector<TrainConfig> make_grid(const TrainConfig& base,
                                   const std::vector<int>& p_values,
                                   const std::vector<double>& lr_values) {
  if (p_values.empty() || lr_values.empty())
    throw std::invalid_argument("make_grid: empty grid axis");
  std::vector<TrainConfig> grid;
  grid.reserve(p_values.size() * lr_values.size());
  for (int p : p_values)
    for (double lr : lr_values) {
      TrainConfig cfg = base;
      cfg.loss.p = p;
      cfg.lr = lr;
      grid.push_back(cfg);
    }
  return grid;
}

CVReport cross_validate(const Dataset& ds, const FoldPlan& folds,
                        const std::vector<TrainConfig>& grid, uint64_t seed,
                        int jobs) {
  if (grid.empty())
    throw std::invalid_argument("cross_validate: empty hyperparameter grid");

  CVReport report;
  report.folds.resize(static_cast<size_t>(folds.k));

  parallel_for(folds.k, jobs, [&](int fold) {
    try {
      std::vector<int> train_idx, test_idx;
      for (size_t i = 0; i < ds.samples.size(); ++i)
        (folds.fold_of(ds.samples[i].id) == fold ? test_idx : train_idx)
            .push_back(static_cast<int>(i));
      const Dataset train_ds = subset(ds, train_idx);
      const Dataset test_ds = subset(ds, test_idx);

      size_t best = 0;
      if (grid.size() > 1) {
        // Inner stratified 90/10 split of the training folds.
        const FoldPlan inner = stratified_folds(
            train_ds, 10, derive_seed(seed, {static_cast<uint64_t>(fold), 0x1111}));
        std::vector<int> fit_idx, val_idx;
        for (size_t i = 0; i < train_ds.samples.size(); ++i)
          (inner.fold_of(train_ds.samples[i].id) == 0 ? val_idx : fit_idx)
              .push_back(static_cast<int>(i));
        const Dataset fit_ds = subset(train_ds, fit_idx);
        const Dataset val_ds = subset(train_ds, val_idx);

        double best_pos_at_top = -1.0, best_pr = -1.0;
        for (size_t g = 0; g < grid.size(); ++g) {
          TrainConfig cfg = grid[g];
          cfg.seed = derive_seed(
              seed, {static_cast<uint64_t>(fold), static_cast<uint64_t>(g)});
          const TrainResult run = train(fit_ds, cfg);
          const EvalReport val = evaluate(run.model, val_ds);
          const bool better =
              val.pos_at_top > best_pos_at_top ||
              (val.pos_at_top == best_pos_at_top &&
               (val.pr_auc > best_pr ||
                (val.pr_auc == best_pr && cfg.lr < grid[best].lr)));
          if (g == 0 || better) {
            best = g;
            best_pos_at_top = val.pos_at_top;
            best_pr = val.pr_auc;
          }
        }
      }

      TrainConfig chosen = grid[best];
      chosen.seed = derive_seed(seed, {static_cast<uint64_t>(fold),
                                       static_cast<uint64_t>(best), 0x2222});
      const TrainResult final_run = train(train_ds, chosen);
      FoldResult& out = report.folds[static_cast<size_t>(fold)];
      out.fold = fold;
      out.chosen = chosen;
      out.report = evaluate(final_run.model, test_ds);
    } catch (const std::exception& e) {
      throw std::runtime_error("fold " + std::to_string(fold) + ": " + e.what());
    }
  });

  auto stats = [&](auto metric) {
    MetricStats s;
    for (const auto& f : report.folds) s.mean += metric(f.report);
    s.mean /= static_cast<double>(report.folds.size());
    for (const auto& f : report.folds) {
      const double d = metric(f.report) - s.mean;
      s.variance += d * d;
    }
    s.variance /= static_cast<double>(report.folds.size());
    return s;
  };
  report.pos_at_top = stats([](const EvalReport& r) { return r.pos_at_top; });
  report.roc_auc = stats([](const EvalReport& r) { return r.roc_auc; });
  report.pr_auc = stats([](const EvalReport& r) { return r.pr_auc; });
  return report;
}

void write_cv_csv(const CVReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "fold,variant,pos_at_top,roc_auc,pr_auc\n";
  for (const auto& f : report.folds)
    out << f.fold << ',' << variant_name(f.chosen.loss.variant) << ','
        << detail::format_double(f.report.pos_at_top) << ','
        << detail::format_double(f.report.roc_auc) << ','
        << detail::format_double(f.report.pr_auc) << '\n';
  if (!out) throw DataError("failed writing: " + path);
}

void write_cv_json(const CVReport& report, const std::string& path) {
  nlohmann::json j;
  j["folds"] = nlohmann::json::array();
  for (const auto& f : report.folds) {
    nlohmann::json fj;
    fj["fold"] = f.fold;
    fj["chosen"] = {{"variant", variant_name(f.chosen.loss.variant)},
                    {"p", f.chosen.loss.p},
                    {"lr", f.chosen.lr},
                    {"lambda", f.chosen.loss.lambda},
                    {"c", f.chosen.loss.c},
                    {"lof_k", f.chosen.lof.k},
                    {"lof_d", f.chosen.lof.d},
                    {"steps", f.chosen.steps},
                    {"hidden_dim", f.chosen.hidden_dim}};
    fj["pos_at_top"] = f.report.pos_at_top;
    fj["roc_auc"] = f.report.roc_auc;
    fj["pr_auc"] = f.report.pr_auc;
    j["folds"].push_back(fj);
  }
  j["aggregate"] = {
      {"pos_at_top",
       {{"mean", report.pos_at_top.mean}, {"variance", report.pos_at_top.variance}}},
      {"roc_auc",
       {{"mean", report.roc_auc.mean}, {"variance", report.roc_auc.variance}}},
      {"pr_auc",
       {{"mean", report.pr_auc.mean}, {"variance", report.pr_auc.variance}}}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing: " + path);
}

}  // namespace toprank
