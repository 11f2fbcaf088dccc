#include "toprank/losses.hpp"

#include <algorithm>
#include <cmath>

namespace toprank {

double surrogate(double z) {
  // log(1 + e^{-z}) on the branch that keeps the exponent non-positive.
  if (z >= 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

double surrogate_grad(double z) {
  // d/dz log(1 + e^{-z}) = -1 / (1 + e^{z})
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(z));
}

namespace {

void check_pnorm_args(std::span<const double> a, int p) {
  if (p < 1) throw std::invalid_argument("pnorm_reduce: p must be >= 1");
  for (double v : a) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(
          "pnorm_reduce: entries must be finite and nonnegative");
  }
}

}  // namespace

double pnorm_reduce(std::span<const double> a, int p) {
  check_pnorm_args(a, p);
  if (a.empty()) return 0.0;
  const double m = *std::max_element(a.begin(), a.end());
  if (m == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : a) {
    const double r = v / m;  // in [0, 1]: r^p can underflow but never overflow
    sum += std::pow(r, static_cast<double>(p));
  }
  return m * std::pow(sum, 1.0 / p);
}

std::vector<double> pnorm_reduce_grad(std::span<const double> a, int p) {
  const double s = pnorm_reduce(a, p);
  std::vector<double> g(a.size(), 0.0);
  if (s == 0.0) return g;  // loss sits at its infimum; gradient defined as 0
  for (size_t j = 0; j < a.size(); ++j)
    g[j] = std::pow(a[j] / s, static_cast<double>(p - 1));
  return g;
}

RejectionPenalty rejection_penalty(std::span<const double> neg_reject,
                                   double lambda, double c) {
  if (neg_reject.empty())
    throw std::invalid_argument("rejection_penalty: empty weight vector");
  const double n = static_cast<double>(neg_reject.size());
  double mean = 0.0;
  for (double r : neg_reject) mean += r;
  mean /= n;
  const double margin = std::max(0.0, c - mean);
  RejectionPenalty out;
  out.value = lambda * margin * margin;
  out.grad.assign(neg_reject.size(), -(2.0 * lambda / n) * margin);
  return out;
}

namespace {

void validate_outputs(const BatchOutputs& o, const LossConfig& cfg) {
  const size_t m = o.pos_scores.size();
  const size_t n = o.neg_scores.size();
  if (m == 0 || n == 0)
    throw std::invalid_argument("loss: both classes must be nonempty");
  const bool want_rej = uses_rejection(cfg.variant);
  const bool want_lof = uses_lof(cfg.variant);
  if (want_rej != !o.neg_reject.empty())
    throw std::invalid_argument(
        "loss: rejection weights must be present exactly for rejecting "
        "variants");
  if (want_lof != !o.neg_lofw.empty())
    throw std::invalid_argument(
        "loss: LOF weights must be present exactly for LOF variants");
  if (want_rej && o.neg_reject.size() != n)
    throw std::invalid_argument("loss: rejection weight count != n");
  if (want_lof && o.neg_lofw.size() != n)
    throw std::invalid_argument("loss: LOF weight count != n");
  for (double v : o.pos_scores)
    if (!std::isfinite(v)) throw NumericError("loss: non-finite positive score");
  for (double v : o.neg_scores)
    if (!std::isfinite(v)) throw NumericError("loss: non-finite negative score");
  // (0, 1] rather than (0, 1): the r == 1 boundary is the exact reduction
  // point to the plain variant and must evaluate.
  for (double v : o.neg_reject)
    if (!(v > 0.0 && v <= 1.0))
      throw std::invalid_argument("loss: rejection weights must be in (0,1]");
  for (double v : o.neg_lofw)
    if (!(v > 0.0 && v <= 1.0))
      throw std::invalid_argument("loss: LOF weights must be in (0,1]");
  if (cfg.p < 1) throw std::invalid_argument("loss: p must be >= 1");
}

}  // namespace

LossValue loss_and_grads(const BatchOutputs& outputs, const LossConfig& cfg,
                         LossGrads* grads) {
  validate_outputs(outputs, cfg);
  const size_t m = outputs.pos_scores.size();
  const size_t n = outputs.neg_scores.size();
  const bool rej = uses_rejection(cfg.variant);
  const bool lof = uses_lof(cfg.variant);
  const double inv_m = 1.0 / static_cast<double>(m);

  // Per-negative attenuation w_j; stays exactly 1.0 for the plain variant so
  // the reduced variants agree with it bitwise when their weights are 1.
  std::vector<double> w(n, 1.0);
  if (rej)
    for (size_t j = 0; j < n; ++j) w[j] *= outputs.neg_reject[j];
  if (lof)
    for (size_t j = 0; j < n; ++j) w[j] *= outputs.neg_lofw[j];

  if (grads) {
    grads->d_pos_scores.assign(m, 0.0);
    grads->d_neg_scores.assign(n, 0.0);
    grads->d_neg_reject.clear();
    if (rej) grads->d_neg_reject.assign(n, 0.0);
  }

  LossValue value;
  std::vector<double> l_row(n), dl_row(n), a_row(n);
  for (size_t i = 0; i < m; ++i) {
    const double t_pos = outputs.pos_scores[i];
    for (size_t j = 0; j < n; ++j) {
      const double gap = t_pos - outputs.neg_scores[j];
      l_row[j] = surrogate(gap);
      dl_row[j] = surrogate_grad(gap);
      a_row[j] = l_row[j] * w[j];
    }
    value.rank_term += inv_m * pnorm_reduce(a_row, cfg.p);
    if (!grads) continue;
    const std::vector<double> dS = pnorm_reduce_grad(a_row, cfg.p);
    for (size_t j = 0; j < n; ++j) {
      const double through_gap = inv_m * dS[j] * dl_row[j] * w[j];
      grads->d_pos_scores[i] += through_gap;
      grads->d_neg_scores[j] -= through_gap;
      if (rej) {
        const double dw_dr = lof ? outputs.neg_lofw[j] : 1.0;
        grads->d_neg_reject[j] += inv_m * dS[j] * l_row[j] * dw_dr;
      }
    }
  }

  if (rej) {
    const RejectionPenalty pen =
        rejection_penalty(outputs.neg_reject, cfg.lambda, cfg.c);
    value.penalty_term = pen.value;
    if (grads)
      for (size_t j = 0; j < n; ++j) grads->d_neg_reject[j] += pen.grad[j];
  }

  value.total = value.rank_term + value.penalty_term;
  return value;
}

}  // namespace toprank
