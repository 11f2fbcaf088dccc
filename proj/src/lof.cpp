#include "toprank/lof.hpp"

#include <algorithm>
#include <cmath>

namespace toprank {

namespace {

constexpr double kLrdClamp = 1e-12;

void check_points(const std::vector<FeatureVector>& points, int k) {
  if (k < 1) throw std::invalid_argument("lof: k must be >= 1");
  if (points.size() <= static_cast<size_t>(k))
    throw std::invalid_argument("lof: need at least k+1 points, got " +
                                std::to_string(points.size()) + " for k=" +
                                std::to_string(k));
  const size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim)
      throw std::invalid_argument("lof: points have mixed dimensions");
    for (double v : p)
      if (!std::isfinite(v))
        throw std::invalid_argument("lof: non-finite coordinate");
  }
}

double euclidean(const FeatureVector& a, const FeatureVector& b) {
  double sq = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace

std::vector<double> lof_scores(const std::vector<FeatureVector>& points, int k) {
  check_points(points, k);
  const int n = static_cast<int>(points.size());
  const size_t uk = static_cast<size_t>(k);

  // k nearest neighbors per point via partial selection; distance ties
  // resolve by index order.
  std::vector<std::vector<int>> knn(points.size());
  std::vector<std::vector<double>> knn_dist(points.size());
  std::vector<double> kdist(points.size());
  std::vector<double> dist(points.size());
  std::vector<int> order(points.size() - 1);
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<size_t>(i);
    int w = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      dist[static_cast<size_t>(j)] = euclidean(points[ui], points[static_cast<size_t>(j)]);
      order[static_cast<size_t>(w++)] = j;
    }
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](int a, int b) {
                        const double da = dist[static_cast<size_t>(a)];
                        const double db = dist[static_cast<size_t>(b)];
                        return da < db || (da == db && a < b);
                      });
    knn[ui].assign(order.begin(), order.begin() + k);
    knn_dist[ui].resize(uk);
    for (size_t j = 0; j < uk; ++j)
      knn_dist[ui][j] = dist[static_cast<size_t>(knn[ui][j])];
    kdist[ui] = knn_dist[ui].back();
  }

  // reach_k(i, o) = max(kdist(o), dist(i, o)); lrd is the inverse mean reach
  // with the denominator clamped so duplicate groups stay finite.
  std::vector<double> lrd(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    double mean_reach = 0.0;
    for (size_t j = 0; j < uk; ++j)
      mean_reach += std::max(kdist[static_cast<size_t>(knn[i][j])], knn_dist[i][j]);
    mean_reach /= k;
    lrd[i] = 1.0 / std::max(mean_reach, kLrdClamp);
  }

  std::vector<double> lof(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    double sum = 0.0;
    for (size_t j = 0; j < uk; ++j) sum += lrd[static_cast<size_t>(knn[i][j])];
    lof[i] = sum / (k * lrd[i]);
  }
  return lof;
}

// Deliberately self-contained: full distance matrix, fully sorted rows, and
// its own density pass, so it cross-checks lof_scores end to end.
std::vector<double> lof_scores_bruteforce(const std::vector<FeatureVector>& points,
                                          int k) {
  check_points(points, k);
  const size_t n = points.size();
  const size_t uk = static_cast<size_t>(k);

  std::vector<std::vector<double>> dm(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) dm[i][j] = euclidean(points[i], points[j]);

  std::vector<std::vector<int>> neighbors(n);
  for (size_t i = 0; i < n; ++i) {
    std::vector<int> order;
    order.reserve(n - 1);
    for (size_t j = 0; j < n; ++j)
      if (j != i) order.push_back(static_cast<int>(j));
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double da = dm[i][static_cast<size_t>(a)];
      const double db = dm[i][static_cast<size_t>(b)];
      return da < db || (da == db && a < b);
    });
    order.resize(uk);
    neighbors[i] = std::move(order);
  }

  auto kth_distance = [&](size_t o) {
    return dm[o][static_cast<size_t>(neighbors[o].back())];
  };

  std::vector<double> density(n);
  for (size_t i = 0; i < n; ++i) {
    double total_reach = 0.0;
    for (int o : neighbors[i]) {
      const auto uo = static_cast<size_t>(o);
      total_reach += std::max(kth_distance(uo), dm[i][uo]);
    }
    density[i] = 1.0 / std::max(total_reach / k, kLrdClamp);
  }

  std::vector<double> lof(n);
  for (size_t i = 0; i < n; ++i) {
    double ratio_sum = 0.0;
    for (int o : neighbors[i]) ratio_sum += density[static_cast<size_t>(o)];
    lof[i] = ratio_sum / k / density[i];
  }
  return lof;
}

double lof_weight(double lof, double d) {
  if (!(lof > 0.0)) throw std::invalid_argument("lof_weight: lof must be > 0");
  if (d < 0.0) throw std::invalid_argument("lof_weight: d must be >= 0");
  return std::pow(1.0 / std::max(lof, 1.0), d);
}

LofReport lof_report(const std::vector<FeatureVector>& points,
                     const LofConfig& cfg) {
  LofReport report;
  report.lof = lof_scores(points, cfg.k);
  report.weights.reserve(report.lof.size());
  for (double v : report.lof) report.weights.push_back(lof_weight(v, cfg.d));
  return report;
}

}  // namespace toprank
