// toprank: train / evaluate / cross-validate top-rank ranking models with an
// optional co-optimized rejection branch and LOF outlier weighting, plus a
// synthetic outlier-injection experiment.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "toprank/detail/text_io.hpp"
#include "toprank/experiment.hpp"
#include "toprank/lof.hpp"
#include "toprank/training.hpp"

namespace {

using namespace toprank;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct LossOpts {
  std::string variant = "toprej";
  int p = 32;
  double lambda = 32.0;
  double c = 0.9;
  int lof_k = 20;
  double lof_d = 100.0;
};

struct OptimOpts {
  double lr = 0.05;
  double momentum = 0.9;
  int steps = 2000;
  int batch_pos = 5;
  int batch_neg = 45;
  int hidden_dim = 64;
  uint64_t seed = 1;
  bool standardize = false;
};

void add_loss_hyper_options(CLI::App* sub, LossOpts& lo) {
  sub->add_option("--lambda", lo.lambda, "Rejection penalty strength")
      ->capture_default_str();
  sub->add_option("--c", lo.c, "Rejection margin (mean weight target)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sub->add_option("--lof-k", lo.lof_k, "LOF neighborhood size")
      ->capture_default_str();
  sub->add_option("--lof-d", lo.lof_d, "LOF weakening exponent")
      ->capture_default_str();
}

void add_variant_option(CLI::App* sub, LossOpts& lo) {
  sub->add_option("--variant", lo.variant,
                  "Loss variant: top|toprej|toplof|toprejlof")
      ->check(CLI::IsMember({"top", "toprej", "toplof", "toprejlof"}))
      ->capture_default_str();
  add_loss_hyper_options(sub, lo);
}

void add_optim_options(CLI::App* sub, OptimOpts& oo, bool with_lr) {
  if (with_lr)
    sub->add_option("--lr", oo.lr, "Learning rate")->capture_default_str();
  sub->add_option("--momentum", oo.momentum, "SGD momentum")
      ->capture_default_str();
  sub->add_option("--steps", oo.steps, "Training steps")->capture_default_str();
  sub->add_option("--batch-pos", oo.batch_pos, "Positives per batch")
      ->capture_default_str();
  sub->add_option("--batch-neg", oo.batch_neg, "Negatives per batch")
      ->capture_default_str();
  sub->add_option("--hidden-dim", oo.hidden_dim, "Hidden layer width")
      ->capture_default_str();
  sub->add_option("--seed", oo.seed, "Master RNG seed")->capture_default_str();
  sub->add_flag("--standardize", oo.standardize,
                "Standardize features per dimension (fitted on training data)")
      ->capture_default_str();
}

// Explicit config writer: one section, every key spelled out with its
// effective value, so the output re-parses into the identical run.
class ConfigDump {
 public:
  explicit ConfigDump(const std::string& section) {
    out_ << '[' << section << "]\n";
  }
  void kv(const std::string& k, const std::string& v) {
    out_ << k << "=\"" << v << "\"\n";
  }
  void kv(const std::string& k, const char* v) { kv(k, std::string(v)); }
  void kv(const std::string& k, double v) {
    out_ << k << '=' << detail::format_double(v) << '\n';
  }
  void kv(const std::string& k, int v) { out_ << k << '=' << v << '\n'; }
  void kv(const std::string& k, uint64_t v) { out_ << k << '=' << v << '\n'; }
  void kv(const std::string& k, bool v) {
    out_ << k << '=' << (v ? "true" : "false") << '\n';
  }
  void kv(const std::string& k, const std::vector<int>& v) {
    out_ << k << "=[";
    for (size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
    out_ << "]\n";
  }
  void kv(const std::string& k, const std::vector<double>& v) {
    out_ << k << "=[";
    for (size_t i = 0; i < v.size(); ++i)
      out_ << (i ? "," : "") << detail::format_double(v[i]);
    out_ << "]\n";
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

void dump_loss_hyper(ConfigDump& d, const LossOpts& lo) {
  d.kv("lambda", lo.lambda);
  d.kv("c", lo.c);
  d.kv("lof-k", lo.lof_k);
  d.kv("lof-d", lo.lof_d);
}

void dump_optim(ConfigDump& d, const OptimOpts& oo, bool with_lr) {
  if (with_lr) d.kv("lr", oo.lr);
  d.kv("momentum", oo.momentum);
  d.kv("steps", oo.steps);
  d.kv("batch-pos", oo.batch_pos);
  d.kv("batch-neg", oo.batch_neg);
  d.kv("hidden-dim", oo.hidden_dim);
  d.kv("seed", oo.seed);
  d.kv("standardize", oo.standardize);
}

TrainConfig make_train_config(const LossOpts& lo, const OptimOpts& oo) {
  TrainConfig cfg;
  cfg.loss.variant = parse_variant(lo.variant);
  cfg.loss.p = lo.p;
  cfg.loss.lambda = lo.lambda;
  cfg.loss.c = lo.c;
  cfg.lof.k = lo.lof_k;
  cfg.lof.d = lo.lof_d;
  cfg.lr = oo.lr;
  cfg.momentum = oo.momentum;
  cfg.steps = oo.steps;
  cfg.batch_pos = oo.batch_pos;
  cfg.batch_neg = oo.batch_neg;
  cfg.hidden_dim = oo.hidden_dim;
  cfg.seed = oo.seed;
  cfg.standardize = oo.standardize;
  return cfg;
}

void print_report(const EvalReport& report) {
  std::cout << "pos_at_top " << report.pos_at_top << '\n'
            << "roc_auc " << report.roc_auc << '\n'
            << "pr_auc " << report.pr_auc << '\n';
}

void write_report_json(const EvalReport& report, const std::string& path) {
  nlohmann::json j;
  j["pos_at_top"] = report.pos_at_top;
  j["roc_auc"] = report.roc_auc;
  j["pr_auc"] = report.pr_auc;
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Top-rank bipartite ranking with a co-optimized rejection "
               "branch and LOF outlier weighting"};
  app.require_subcommand(0, 1);
  app.set_config("--config", "", "Read options from a config file");
  app.allow_config_extras(false);
  bool print_config = false;
  app.add_flag("--print-config", print_config,
               "Print the effective configuration (all defaults explicit) "
               "and exit")
      ->configurable(false);

  // ---- train ----------------------------------------------------------
  auto* train_cmd =
      app.add_subcommand("train", "Train one model on a feature CSV");
  train_cmd->configurable();
  train_cmd->fallthrough();
  LossOpts train_loss;
  OptimOpts train_optim;
  std::string train_data, train_model_out, train_record_out;
  train_cmd->add_option("--data", train_data, "Training CSV (label,f1,...)")
      ->required();
  train_cmd->add_option("--model-out", train_model_out, "Model file to write")
      ->required();
  train_cmd
      ->add_option("--record-out", train_record_out,
                   "Per-step record CSV (default: <model-out>.records.csv)")
      ->capture_default_str();
  train_cmd->add_option("--p", train_loss.p, "p-norm degree")
      ->capture_default_str();
  add_variant_option(train_cmd, train_loss);
  add_optim_options(train_cmd, train_optim, /*with_lr=*/true);

  // ---- eval -----------------------------------------------------------
  auto* eval_cmd =
      app.add_subcommand("eval", "Evaluate a saved model on a feature CSV");
  eval_cmd->configurable();
  eval_cmd->fallthrough();
  std::string eval_data, eval_model, eval_report_out, eval_roc_out, eval_pr_out;
  eval_cmd->add_option("--data", eval_data, "Evaluation CSV")->required();
  eval_cmd->add_option("--model", eval_model, "Model file")->required();
  eval_cmd->add_option("--report-out", eval_report_out, "Metrics JSON")
      ->capture_default_str();
  eval_cmd->add_option("--roc-out", eval_roc_out, "ROC curve CSV")
      ->capture_default_str();
  eval_cmd->add_option("--pr-out", eval_pr_out, "PR curve CSV")
      ->capture_default_str();

  // ---- cv -------------------------------------------------------------
  auto* cv_cmd = app.add_subcommand(
      "cv", "Stratified k-fold cross-validation with inner grid search");
  cv_cmd->configurable();
  cv_cmd->fallthrough();
  LossOpts cv_loss;
  OptimOpts cv_optim;
  std::string cv_data, cv_out_dir;
  int cv_k = 10;
  int cv_jobs = 1;
  std::vector<int> cv_p_grid = {16, 32, 64};
  std::vector<double> cv_lr_grid;
  for (int i = 1; i <= 10; ++i) cv_lr_grid.push_back(i / 100.0);
  cv_cmd->add_option("--data", cv_data, "Dataset CSV")->required();
  cv_cmd->add_option("--out-dir", cv_out_dir,
                     "Directory for report.json, report.csv, manifest.json")
      ->required();
  cv_cmd->add_option("--k", cv_k, "Fold count")->capture_default_str();
  cv_cmd->add_option("--p-grid", cv_p_grid, "p-norm grid")
      ->capture_default_str();
  cv_cmd->add_option("--lr-grid", cv_lr_grid, "Learning-rate grid")
      ->capture_default_str();
  cv_cmd->add_option("--jobs", cv_jobs, "Parallel fold workers")
      ->capture_default_str();
  add_variant_option(cv_cmd, cv_loss);
  add_optim_options(cv_cmd, cv_optim, /*with_lr=*/false);

  // ---- synth ----------------------------------------------------------
  auto* synth_cmd = app.add_subcommand(
      "synth", "Synthetic outlier-injection experiment over all variants");
  synth_cmd->configurable();
  synth_cmd->fallthrough();
  LossOpts synth_loss;
  OptimOpts synth_optim;
  std::string synth_out_dir;
  int synth_repeats = 5;
  int synth_jobs = 1;
  SynthConfig synth_cfg;
  synth_cmd->add_option("--out-dir", synth_out_dir, "Output directory")
      ->required();
  synth_cmd->add_option("--n-pos", synth_cfg.n_pos, "Positives per split")
      ->capture_default_str();
  synth_cmd->add_option("--n-neg", synth_cfg.n_neg, "Negatives per split")
      ->capture_default_str();
  synth_cmd->add_option("--dim", synth_cfg.dim, "Feature dimension")
      ->capture_default_str();
  synth_cmd
      ->add_option("--separation", synth_cfg.separation,
                   "Inter-class mean distance (in stddev units)")
      ->capture_default_str();
  synth_cmd
      ->add_option("--outlier-rate", synth_cfg.outlier_rate,
                   "Fraction of train negatives displaced")
      ->capture_default_str();
  synth_cmd
      ->add_option("--outlier-shift", synth_cfg.outlier_shift,
                   "Displacement along the class axis")
      ->capture_default_str();
  synth_cmd->add_option("--repeats", synth_repeats, "Seeded repetitions")
      ->capture_default_str();
  synth_cmd->add_option("--jobs", synth_jobs, "Parallel run workers")
      ->capture_default_str();
  synth_cmd->add_option("--p", synth_loss.p, "p-norm degree")
      ->capture_default_str();
  add_loss_hyper_options(synth_cmd, synth_loss);
  add_optim_options(synth_cmd, synth_optim, /*with_lr=*/true);

  // ---- lof ------------------------------------------------------------
  auto* lof_cmd = app.add_subcommand(
      "lof", "LOF scores and weights of the negative samples of a CSV");
  lof_cmd->configurable();
  lof_cmd->fallthrough();
  std::string lof_data, lof_out;
  int lof_k = 20;
  double lof_d = 100.0;
  lof_cmd->add_option("--data", lof_data, "Dataset CSV")->required();
  lof_cmd->add_option("--k", lof_k, "Neighborhood size")->capture_default_str();
  lof_cmd->add_option("--d", lof_d, "Weakening exponent")
      ->capture_default_str();
  lof_cmd->add_option("--out", lof_out, "Output CSV (id,lof,weight)")
      ->required();

  // ---- curves ---------------------------------------------------------
  auto* curves_cmd = app.add_subcommand(
      "curves", "Export ROC and PR curve points of a model on a CSV");
  curves_cmd->configurable();
  curves_cmd->fallthrough();
  std::string curves_data, curves_model, curves_roc_out, curves_pr_out;
  curves_cmd->add_option("--data", curves_data, "Dataset CSV")->required();
  curves_cmd->add_option("--model", curves_model, "Model file")->required();
  curves_cmd->add_option("--roc-out", curves_roc_out, "ROC curve CSV")
      ->required();
  curves_cmd->add_option("--pr-out", curves_pr_out, "PR curve CSV")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (print_config) {
    const bool all = app.get_subcommands().empty();
    if (all || app.got_subcommand(train_cmd)) {
      ConfigDump d("train");
      d.kv("data", train_data);
      d.kv("model-out", train_model_out);
      d.kv("record-out", train_record_out);
      d.kv("p", train_loss.p);
      d.kv("variant", train_loss.variant);
      dump_loss_hyper(d, train_loss);
      dump_optim(d, train_optim, true);
      std::cout << d.str();
    }
    if (all || app.got_subcommand(eval_cmd)) {
      ConfigDump d("eval");
      d.kv("data", eval_data);
      d.kv("model", eval_model);
      d.kv("report-out", eval_report_out);
      d.kv("roc-out", eval_roc_out);
      d.kv("pr-out", eval_pr_out);
      std::cout << d.str();
    }
    if (all || app.got_subcommand(cv_cmd)) {
      ConfigDump d("cv");
      d.kv("data", cv_data);
      d.kv("out-dir", cv_out_dir);
      d.kv("k", cv_k);
      d.kv("p-grid", cv_p_grid);
      d.kv("lr-grid", cv_lr_grid);
      d.kv("jobs", cv_jobs);
      d.kv("variant", cv_loss.variant);
      dump_loss_hyper(d, cv_loss);
      dump_optim(d, cv_optim, false);
      std::cout << d.str();
    }
    if (all || app.got_subcommand(synth_cmd)) {
      ConfigDump d("synth");
      d.kv("out-dir", synth_out_dir);
      d.kv("n-pos", synth_cfg.n_pos);
      d.kv("n-neg", synth_cfg.n_neg);
      d.kv("dim", synth_cfg.dim);
      d.kv("separation", synth_cfg.separation);
      d.kv("outlier-rate", synth_cfg.outlier_rate);
      d.kv("outlier-shift", synth_cfg.outlier_shift);
      d.kv("repeats", synth_repeats);
      d.kv("jobs", synth_jobs);
      d.kv("p", synth_loss.p);
      dump_loss_hyper(d, synth_loss);
      dump_optim(d, synth_optim, true);
      std::cout << d.str();
    }
    if (all || app.got_subcommand(lof_cmd)) {
      ConfigDump d("lof");
      d.kv("data", lof_data);
      d.kv("k", lof_k);
      d.kv("d", lof_d);
      d.kv("out", lof_out);
      std::cout << d.str();
    }
    if (all || app.got_subcommand(curves_cmd)) {
      ConfigDump d("curves");
      d.kv("data", curves_data);
      d.kv("model", curves_model);
      d.kv("roc-out", curves_roc_out);
      d.kv("pr-out", curves_pr_out);
      std::cout << d.str();
    }
    return kExitOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(train_cmd)) {
      const Dataset ds = load_csv(train_data);
      const TrainConfig cfg = make_train_config(train_loss, train_optim);
      const TrainResult result = train(ds, cfg);
      save_model(result.model, train_model_out);
      const std::string record_path = train_record_out.empty()
                                          ? train_model_out + ".records.csv"
                                          : train_record_out;
      write_records_csv(result.records, record_path);
      std::cout << "wrote " << train_model_out << " and " << record_path
                << '\n';
    } else if (app.got_subcommand(eval_cmd)) {
      const Model model = load_model(eval_model);
      const Dataset ds = load_csv(eval_data);
      const EvalReport report = evaluate(model, ds);
      print_report(report);
      if (!eval_report_out.empty()) write_report_json(report, eval_report_out);
      if (!eval_roc_out.empty()) write_roc_csv(report.roc_points, eval_roc_out);
      if (!eval_pr_out.empty()) write_pr_csv(report.pr_points, eval_pr_out);
    } else if (app.got_subcommand(cv_cmd)) {
      const Dataset ds = load_csv(cv_data);
      const FoldPlan plan = stratified_folds(ds, cv_k, cv_optim.seed);
      TrainConfig base = make_train_config(cv_loss, cv_optim);
      const std::vector<TrainConfig> grid =
          make_grid(base, cv_p_grid, cv_lr_grid);
      const CVReport report =
          cross_validate(ds, plan, grid, cv_optim.seed, cv_jobs);

      namespace fs = std::filesystem;
      fs::create_directories(cv_out_dir);
      write_cv_json(report, (fs::path(cv_out_dir) / "report.json").string());
      write_cv_csv(report, (fs::path(cv_out_dir) / "report.csv").string());

      nlohmann::json manifest;
      manifest["command"] = "cv";
      manifest["data"] = cv_data;
      manifest["n_pos"] = ds.count(Label::Positive);
      manifest["n_neg"] = ds.count(Label::Negative);
      manifest["dim"] = ds.dim;
      manifest["k"] = plan.k;
      nlohmann::json fold_counts = nlohmann::json::array();
      for (int f = 0; f < plan.k; ++f) {
        int pos = 0, neg = 0;
        for (const auto& s : ds.samples)
          if (plan.fold_of(s.id) == f)
            (s.label == Label::Positive ? pos : neg)++;
        fold_counts.push_back({{"fold", f}, {"pos", pos}, {"neg", neg}});
      }
      manifest["fold_counts"] = fold_counts;
      manifest["batch_pos"] = base.batch_pos;
      manifest["batch_neg"] = base.batch_neg;
      manifest["p_grid"] = cv_p_grid;
      manifest["lr_grid"] = cv_lr_grid;
      manifest["variant"] = variant_name(base.loss.variant);
      manifest["lambda"] = base.loss.lambda;
      manifest["c"] = base.loss.c;
      manifest["lof_k"] = base.lof.k;
      manifest["lof_d"] = base.lof.d;
      manifest["steps"] = base.steps;
      manifest["momentum"] = base.momentum;
      manifest["hidden_dim"] = base.hidden_dim;
      manifest["standardize"] = base.standardize;
      manifest["seed"] = base.seed;
      manifest["jobs"] = cv_jobs;
      std::ofstream mf((fs::path(cv_out_dir) / "manifest.json").string());
      if (!mf) throw DataError("cannot write manifest in " + cv_out_dir);
      mf << manifest.dump(2) << '\n';

      std::cout << "pos_at_top " << report.pos_at_top.mean << " +- "
                << report.pos_at_top.variance << '\n'
                << "roc_auc " << report.roc_auc.mean << " +- "
                << report.roc_auc.variance << '\n'
                << "pr_auc " << report.pr_auc.mean << " +- "
                << report.pr_auc.variance << '\n';
    } else if (app.got_subcommand(synth_cmd)) {
      ExperimentConfig cfg;
      cfg.synth = synth_cfg;
      cfg.synth.seed = synth_optim.seed;
      cfg.base = make_train_config(synth_loss, synth_optim);
      cfg.repeats = synth_repeats;
      cfg.jobs = synth_jobs;
      const ExperimentResult result = run_experiment(cfg);
      write_experiment_outputs(cfg, result, synth_out_dir);
      std::cout << "variant pos_at_top roc_auc pr_auc\n";
      for (const auto& row : result.table)
        std::cout << variant_name(row.variant) << ' ' << row.pos_at_top.mean
                  << "+-" << row.pos_at_top.variance << ' '
                  << row.roc_auc.mean << "+-" << row.roc_auc.variance << ' '
                  << row.pr_auc.mean << "+-" << row.pr_auc.variance << '\n';
    } else if (app.got_subcommand(lof_cmd)) {
      const Dataset ds = load_csv(lof_data);
      std::vector<FeatureVector> points;
      std::vector<int> ids;
      for (const auto& s : ds.samples) {
        if (s.label != Label::Negative) continue;
        points.push_back(s.features);
        ids.push_back(s.id);
      }
      const LofReport report = lof_report(points, LofConfig{lof_k, lof_d});
      std::ofstream out(lof_out);
      if (!out) throw DataError("cannot open for writing: " + lof_out);
      out << "id,lof,weight\n";
      for (size_t i = 0; i < ids.size(); ++i)
        out << ids[i] << ',' << toprank::detail::format_double(report.lof[i])
            << ',' << toprank::detail::format_double(report.weights[i])
            << '\n';
    } else if (app.got_subcommand(curves_cmd)) {
      const Model model = load_model(curves_model);
      const Dataset ds = load_csv(curves_data);
      const EvalReport report = evaluate(model, ds);
      write_roc_csv(report.roc_points, curves_roc_out);
      write_pr_csv(report.pr_points, curves_pr_out);
    }
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
