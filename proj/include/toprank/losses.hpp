#pragma once

#include <span>
#include <vector>

#include "toprank/common.hpp"

namespace toprank {

struct LossConfig {
  LossVariant variant = LossVariant::Top;
  int p = 32;           // p-norm relaxation degree
  double lambda = 32.0; // rejection penalty strength
  double c = 0.9;       // rejection margin: mean r is pushed toward >= c
};

/// Branch outputs for one batch. neg_reject is present iff the variant has a
/// rejection branch; neg_lofw iff the variant applies LOF weights.
struct BatchOutputs {
  std::vector<double> pos_scores;  // t(x_i+), size m
  std::vector<double> neg_scores;  // t(x_j-), size n
  std::vector<double> neg_reject;  // r(x_j-) in (0,1), size n or empty
  std::vector<double> neg_lofw;    // LOF weights in (0,1], size n or empty
};

struct LossValue {
  double total = 0.0;
  double rank_term = 0.0;
  double penalty_term = 0.0;
};

struct LossGrads {
  std::vector<double> d_pos_scores;
  std::vector<double> d_neg_scores;
  std::vector<double> d_neg_reject;  // empty for non-rejecting variants
};

/// Surrogate l(z) = log(1 + e^{-z}), evaluated on the stable branch for
/// either sign of z. Strictly positive for finite z.
double surrogate(double z);

/// dl/dz = -sigmoid(-z), in (-1, 0).
double surrogate_grad(double z);

/// (sum a_j^p)^{1/p} for nonnegative a, computed by factoring out max(a) so
/// neither a_j^p overflow nor underflow can occur. Zero iff all a_j are zero.
double pnorm_reduce(std::span<const double> a, int p);

/// dS/da_j = (a_j / S)^{p-1}; all components in [0, 1]; all-zero when S = 0.
std::vector<double> pnorm_reduce_grad(std::span<const double> a, int p);

struct RejectionPenalty {
  double value = 0.0;
  std::vector<double> grad;  // d value / d r_j
};

/// lambda * max(0, c - mean(r))^2 and its gradient.
RejectionPenalty rejection_penalty(std::span<const double> neg_reject,
                                   double lambda, double c);

/// Full loss of one batch under cfg.variant, decomposed into rank and
/// penalty terms, plus exact gradients w.r.t. every branch output when
/// grads is non-null.
LossValue loss_and_grads(const BatchOutputs& outputs, const LossConfig& cfg,
                         LossGrads* grads = nullptr);

}  // namespace toprank
