#include "toprank/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "toprank/detail/text_io.hpp"
#include "toprank/parallel.hpp"
#include "toprank/rng.hpp"

namespace toprank {

namespace {

uint64_t repeat_seed(const ExperimentConfig& cfg, int repeat) {
  return derive_seed(cfg.synth.seed, {0xda7a, static_cast<uint64_t>(repeat)});
}

ExperimentRun run_one(const ExperimentConfig& cfg, int repeat,
                      size_t variant_idx) {
  SynthConfig sc = cfg.synth;
  sc.seed = repeat_seed(cfg, repeat);
  const SynthData data = synth_generate(sc);

  ExperimentRun run;
  run.variant = cfg.variants[variant_idx];
  run.repeat = repeat;

  TrainConfig tc = cfg.base;
  tc.loss.variant = run.variant;
  tc.seed = derive_seed(cfg.synth.seed,
                        {0x7261696e, static_cast<uint64_t>(repeat), variant_idx});
  const TrainResult trained = train(data.train, tc);
  run.test_report = evaluate(trained.model, data.test);

  if (uses_rejection(run.variant)) {
    const Model& model = trained.model;
    for (const auto& s : data.train.samples) {
      if (s.label != Label::Negative) continue;
      const FeatureVector x =
          model.scaler ? model.scaler->apply(s.features) : s.features;
      RejectWeightRow row;
      row.id = s.id;
      row.injected = std::binary_search(data.outlier_ids.begin(),
                                        data.outlier_ids.end(), s.id);
      row.weight = forward_reject(*model.params.reject, x);
      run.reject_weights.push_back(row);
    }
  }
  return run;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.repeats < 1)
    throw std::invalid_argument("experiment: repeats must be >= 1");
  if (cfg.variants.empty())
    throw std::invalid_argument("experiment: no variants requested");

  ExperimentResult result;
  const int total = cfg.repeats * static_cast<int>(cfg.variants.size());
  result.runs.resize(static_cast<size_t>(total));
  parallel_for(total, cfg.jobs, [&](int i) {
    const int repeat = i / static_cast<int>(cfg.variants.size());
    const size_t variant_idx =
        static_cast<size_t>(i) % cfg.variants.size();
    result.runs[static_cast<size_t>(i)] = run_one(cfg, repeat, variant_idx);
  });

  for (size_t v = 0; v < cfg.variants.size(); ++v) {
    ExperimentTableRow row;
    row.variant = cfg.variants[v];
    auto stats = [&](auto metric) {
      MetricStats s;
      for (int r = 0; r < cfg.repeats; ++r)
        s.mean += metric(
            result.runs[static_cast<size_t>(r) * cfg.variants.size() + v]
                .test_report);
      s.mean /= cfg.repeats;
      for (int r = 0; r < cfg.repeats; ++r) {
        const double d =
            metric(result.runs[static_cast<size_t>(r) * cfg.variants.size() + v]
                       .test_report) -
            s.mean;
        s.variance += d * d;
      }
      s.variance /= cfg.repeats;
      return s;
    };
    row.pos_at_top = stats([](const EvalReport& r) { return r.pos_at_top; });
    row.roc_auc = stats([](const EvalReport& r) { return r.roc_auc; });
    row.pr_auc = stats([](const EvalReport& r) { return r.pr_auc; });
    result.table.push_back(row);
  }
  return result;
}

void write_experiment_outputs(const ExperimentConfig& cfg,
                              const ExperimentResult& result,
                              const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto at = [&](const std::string& name) {
    return (fs::path(out_dir) / name).string();
  };

  {
    std::ofstream out(at("summary.csv"));
    if (!out) throw DataError("cannot open for writing: " + at("summary.csv"));
    out << "variant,repeat,pos_at_top,roc_auc,pr_auc\n";
    for (const auto& run : result.runs)
      out << variant_name(run.variant) << ',' << run.repeat << ','
          << detail::format_double(run.test_report.pos_at_top) << ','
          << detail::format_double(run.test_report.roc_auc) << ','
          << detail::format_double(run.test_report.pr_auc) << '\n';
  }
  {
    std::ofstream out(at("table.csv"));
    if (!out) throw DataError("cannot open for writing: " + at("table.csv"));
    out << "variant,pos_at_top_mean,pos_at_top_var,roc_auc_mean,roc_auc_var,"
           "pr_auc_mean,pr_auc_var\n";
    for (const auto& row : result.table)
      out << variant_name(row.variant) << ','
          << detail::format_double(row.pos_at_top.mean) << ','
          << detail::format_double(row.pos_at_top.variance) << ','
          << detail::format_double(row.roc_auc.mean) << ','
          << detail::format_double(row.roc_auc.variance) << ','
          << detail::format_double(row.pr_auc.mean) << ','
          << detail::format_double(row.pr_auc.variance) << '\n';
  }
  {
    std::ofstream out(at("rejection_weights.csv"));
    if (!out)
      throw DataError("cannot open for writing: " + at("rejection_weights.csv"));
    out << "variant,repeat,id,is_injected,weight\n";
    for (const auto& run : result.runs)
      for (const auto& row : run.reject_weights)
        out << variant_name(run.variant) << ',' << run.repeat << ',' << row.id
            << ',' << (row.injected ? 1 : 0) << ','
            << detail::format_double(row.weight) << '\n';
  }

  // Curves of the first repeat, one pair of files per variant.
  for (const auto& run : result.runs) {
    if (run.repeat != 0) continue;
    write_roc_csv(run.test_report.roc_points,
                  at("roc_" + variant_name(run.variant) + ".csv"));
    write_pr_csv(run.test_report.pr_points,
                 at("pr_" + variant_name(run.variant) + ".csv"));
  }

  // First repeat's data, regenerated (the generator is seed-deterministic).
  SynthConfig sc = cfg.synth;
  sc.seed = repeat_seed(cfg, 0);
  const SynthData data = synth_generate(sc);
  save_csv(data.train, at("train_repeat0.csv"));
  save_csv(data.test, at("test_repeat0.csv"));
  write_outlier_ids_csv(data.train, data.outlier_ids, at("outliers_repeat0.csv"));
}

}  // namespace toprank
