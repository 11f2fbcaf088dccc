#include "toprank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "toprank/detail/text_io.hpp"

namespace toprank {

namespace {

void check_nonempty(const ScoredSet& s) {
  if (s.pos_scores.empty() || s.neg_scores.empty())
    throw std::invalid_argument("metrics: both classes must be nonempty");
  for (double v : s.pos_scores)
    if (!std::isfinite(v)) throw NumericError("metrics: non-finite score");
  for (double v : s.neg_scores)
    if (!std::isfinite(v)) throw NumericError("metrics: non-finite score");
}

// Scores of both classes merged and sorted descending, with per-threshold
// group counts.
struct ThresholdGroups {
  std::vector<double> threshold;  // unique scores, descending
  std::vector<int> pos_at;        // positives scoring exactly threshold[g]
  std::vector<int> neg_at;
};

ThresholdGroups group_by_threshold(const ScoredSet& s) {
  std::vector<std::pair<double, bool>> scored;  // (score, is_positive)
  scored.reserve(s.pos_scores.size() + s.neg_scores.size());
  for (double v : s.pos_scores) scored.emplace_back(v, true);
  for (double v : s.neg_scores) scored.emplace_back(v, false);
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  ThresholdGroups g;
  for (size_t i = 0; i < scored.size();) {
    size_t j = i;
    int pos = 0, neg = 0;
    while (j < scored.size() && scored[j].first == scored[i].first) {
      (scored[j].second ? pos : neg)++;
      ++j;
    }
    g.threshold.push_back(scored[i].first);
    g.pos_at.push_back(pos);
    g.neg_at.push_back(neg);
    i = j;
  }
  return g;
}

}  // namespace

double pos_at_top(const ScoredSet& s) {
  check_nonempty(s);
  const double top_neg =
      *std::max_element(s.neg_scores.begin(), s.neg_scores.end());
  int absolute = 0;
  for (double v : s.pos_scores)
    if (v > top_neg) ++absolute;
  return static_cast<double>(absolute) /
         static_cast<double>(s.pos_scores.size());
}

double roc_auc(const ScoredSet& s) {
  check_nonempty(s);
  const size_t m = s.pos_scores.size();
  const size_t n = s.neg_scores.size();

  // Midrank formulation of the Mann-Whitney statistic. Midranks are exact
  // multiples of 1/2, so this matches pairwise enumeration bit for bit.
  std::vector<std::pair<double, bool>> all;
  all.reserve(m + n);
  for (double v : s.pos_scores) all.emplace_back(v, true);
  for (double v : s.neg_scores) all.emplace_back(v, false);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  double pos_rank_sum = 0.0;
  for (size_t i = 0; i < all.size();) {
    size_t j = i;
    int pos = 0;
    while (j < all.size() && all[j].first == all[i].first) {
      if (all[j].second) ++pos;
      ++j;
    }
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    pos_rank_sum += midrank * pos;
    i = j;
  }
  const double md = static_cast<double>(m);
  const double u = pos_rank_sum - md * (md + 1.0) / 2.0;
  return u / (md * static_cast<double>(n));
}

double pr_auc(const ScoredSet& s) {
  check_nonempty(s);
  const ThresholdGroups g = group_by_threshold(s);
  const double m = static_cast<double>(s.pos_scores.size());
  double ap = 0.0;
  double prev_recall = 0.0;
  int tp = 0, fp = 0;
  for (size_t i = 0; i < g.threshold.size(); ++i) {
    tp += g.pos_at[i];
    fp += g.neg_at[i];
    const double recall = tp / m;
    const double precision = static_cast<double>(tp) / (tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

void curve_points(const ScoredSet& s, std::vector<RocPoint>& roc,
                  std::vector<PrPoint>& pr) {
  check_nonempty(s);
  const ThresholdGroups g = group_by_threshold(s);
  const double m = static_cast<double>(s.pos_scores.size());
  const double n = static_cast<double>(s.neg_scores.size());
  roc.clear();
  pr.clear();
  roc.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  int tp = 0, fp = 0;
  for (size_t i = 0; i < g.threshold.size(); ++i) {
    tp += g.pos_at[i];
    fp += g.neg_at[i];
    roc.push_back({g.threshold[i], fp / n, tp / m});
    pr.push_back({g.threshold[i], tp / m, static_cast<double>(tp) / (tp + fp)});
  }
}

EvalReport evaluate_scores(const ScoredSet& s) {
  EvalReport report;
  report.pos_at_top = pos_at_top(s);
  report.roc_auc = roc_auc(s);
  report.pr_auc = pr_auc(s);
  curve_points(s, report.roc_points, report.pr_points);
  return report;
}

void write_roc_csv(const std::vector<RocPoint>& points,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "threshold,fpr,tpr\n";
  for (const auto& p : points)
    out << detail::format_double(p.threshold) << ','
        << detail::format_double(p.fpr) << ',' << detail::format_double(p.tpr)
        << '\n';
  if (!out) throw DataError("failed writing: " + path);
}

void write_pr_csv(const std::vector<PrPoint>& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "threshold,recall,precision\n";
  for (const auto& p : points)
    out << detail::format_double(p.threshold) << ','
        << detail::format_double(p.recall) << ','
        << detail::format_double(p.precision) << '\n';
  if (!out) throw DataError("failed writing: " + path);
}

}  // namespace toprank
