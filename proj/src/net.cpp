#include "toprank/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "toprank/rng.hpp"

namespace toprank {

namespace {

void check_dims(const BranchParams& p, size_t x_dim) {
  if (static_cast<size_t>(p.in_dim) != x_dim)
    throw std::invalid_argument("forward: input has dimension " +
                                std::to_string(x_dim) + ", branch expects " +
                                std::to_string(p.in_dim));
}

double stable_sigmoid(double z) {
  double s;
  if (z >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    s = e / (1.0 + e);
  }
  // Keep the output strictly inside (0, 1) even where the exact sigmoid
  // rounds to 0.0 or 1.0 in double precision.
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - 0x1.0p-53;
  return std::clamp(s, lo, hi);
}

/// Linear part shared by both branches: W2^T relu(W1^T x + b1) + b2.
double branch_linear(const BranchParams& p, const FeatureVector& x,
                     BranchCache* cache) {
  const int h = p.hidden_dim;
  std::vector<double> pre(p.b1);
  for (int i = 0; i < p.in_dim; ++i) {
    const double xi = x[static_cast<size_t>(i)];
    const double* row = &p.w1[static_cast<size_t>(i) * h];
    for (int j = 0; j < h; ++j) pre[static_cast<size_t>(j)] += xi * row[j];
  }
  double out = p.b2;
  for (int j = 0; j < h; ++j) {
    const double a = pre[static_cast<size_t>(j)];
    if (a > 0.0) out += p.w2[static_cast<size_t>(j)] * a;
  }
  if (cache) {
    cache->input = x;
    cache->pre_hidden = std::move(pre);
  }
  return out;
}

/// Chain rule through one branch given d(loss)/d(linear output).
void accumulate_branch(const BranchParams& p, const BranchCache& cache,
                       double d_out, BranchGrads& g) {
  const int h = p.hidden_dim;
  if (cache.pre_hidden.size() != static_cast<size_t>(h) ||
      cache.input.size() != static_cast<size_t>(p.in_dim))
    throw std::invalid_argument("backward: cache shape does not match params");
  g.b2 += d_out;
  for (int j = 0; j < h; ++j) {
    const double a = cache.pre_hidden[static_cast<size_t>(j)];
    if (a <= 0.0) continue;  // dead relu unit: no gradient flows
    g.w2[static_cast<size_t>(j)] += d_out * a;
    const double d_pre = d_out * p.w2[static_cast<size_t>(j)];
    g.b1[static_cast<size_t>(j)] += d_pre;
    for (int i = 0; i < p.in_dim; ++i)
      g.w1[static_cast<size_t>(i) * h + j] +=
          d_pre * cache.input[static_cast<size_t>(i)];
  }
}

BranchGrads zero_branch_grads(const BranchParams& p) {
  BranchGrads g;
  g.w1.assign(p.w1.size(), 0.0);
  g.b1.assign(p.b1.size(), 0.0);
  g.w2.assign(p.w2.size(), 0.0);
  g.b2 = 0.0;
  return g;
}

// Flat parameter/gradient walkers keep sgd_step shape-agnostic.
template <typename Fn>
void for_each_param(BranchParams& p, BranchGrads const& g, Fn&& fn) {
  for (size_t i = 0; i < p.w1.size(); ++i) fn(p.w1[i], g.w1[i]);
  for (size_t i = 0; i < p.b1.size(); ++i) fn(p.b1[i], g.b1[i]);
  for (size_t i = 0; i < p.w2.size(); ++i) fn(p.w2[i], g.w2[i]);
  fn(p.b2, g.b2);
}

size_t param_count(const BranchParams& p) {
  return p.w1.size() + p.b1.size() + p.w2.size() + 1;
}

}  // namespace

BranchParams init_branch(int in_dim, int hidden_dim, Activation activation,
                         uint64_t seed) {
  if (in_dim < 1 || hidden_dim < 1)
    throw std::invalid_argument("init_branch: dimensions must be >= 1");
  BranchParams p;
  p.in_dim = in_dim;
  p.hidden_dim = hidden_dim;
  p.activation = activation;
  p.w1.resize(static_cast<size_t>(in_dim) * hidden_dim);
  p.b1.assign(static_cast<size_t>(hidden_dim), 0.0);
  p.w2.resize(static_cast<size_t>(hidden_dim));
  p.b2 = 0.0;
  Rng rng(seed);
  const double s1 = std::sqrt(6.0 / (in_dim + hidden_dim));
  for (double& w : p.w1) w = rng.uniform(-s1, s1);
  const double s2 = std::sqrt(6.0 / (hidden_dim + 1));
  for (double& w : p.w2) w = rng.uniform(-s2, s2);
  return p;
}

double forward_top(const BranchParams& params, const FeatureVector& x,
                   BranchCache* cache) {
  if (params.activation != Activation::ReluTop)
    throw std::invalid_argument("forward_top: branch is not a ranking branch");
  check_dims(params, x.size());
  const double score = branch_linear(params, x, cache);
  if (cache) cache->output = score;
  return score;
}

double forward_reject(const BranchParams& params, const FeatureVector& x,
                      BranchCache* cache) {
  if (params.activation != Activation::SigmoidReject)
    throw std::invalid_argument(
        "forward_reject: branch is not a rejection branch");
  check_dims(params, x.size());
  const double weight = stable_sigmoid(branch_linear(params, x, cache));
  if (cache) cache->output = weight;
  return weight;
}

ParamGrads zero_grads_like(const ModelParams& params) {
  ParamGrads g;
  g.top = zero_branch_grads(params.top);
  if (params.reject) g.reject = zero_branch_grads(*params.reject);
  return g;
}

ParamGrads backward(const ModelParams& params,
                    const std::vector<BranchCache>& top_caches,
                    const std::vector<double>& d_score,
                    const std::vector<BranchCache>& reject_caches,
                    const std::vector<double>& d_weight) {
  if (top_caches.size() != d_score.size())
    throw std::invalid_argument("backward: top cache/gradient count mismatch");
  if (reject_caches.size() != d_weight.size())
    throw std::invalid_argument(
        "backward: reject cache/gradient count mismatch");
  if (!params.reject && !reject_caches.empty())
    throw std::invalid_argument(
        "backward: reject caches supplied but model has no reject branch");

  ParamGrads g = zero_grads_like(params);
  for (size_t s = 0; s < top_caches.size(); ++s)
    accumulate_branch(params.top, top_caches[s], d_score[s], g.top);
  if (params.reject) {
    for (size_t s = 0; s < reject_caches.size(); ++s) {
      // d weight / d logit = w (1 - w) for the sigmoid output.
      const double w = reject_caches[s].output;
      accumulate_branch(*params.reject, reject_caches[s],
                        d_weight[s] * w * (1.0 - w), *g.reject);
    }
  }
  return g;
}

void sgd_step(ModelParams& params, const ParamGrads& grads, double lr,
              double momentum, SgdState& state) {
  if (lr < 0.0) throw std::invalid_argument("sgd_step: lr must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0)
    throw std::invalid_argument("sgd_step: momentum must be in [0, 1)");

  size_t total = param_count(params.top);
  if (params.reject) total += param_count(*params.reject);
  if (state.velocity.empty()) state.velocity.assign(total, 0.0);
  if (state.velocity.size() != total)
    throw std::invalid_argument("sgd_step: optimizer state shape mismatch");

  if ((grads.reject.has_value()) != (params.reject.has_value()))
    throw std::invalid_argument("sgd_step: gradient/model branch mismatch");

  // Validate before touching params so a rejected step leaves them intact.
  bool finite = true;
  auto check = [&](double&, const double& grad) {
    finite = finite && std::isfinite(grad);
  };
  for_each_param(params.top, grads.top, check);
  if (params.reject) for_each_param(*params.reject, *grads.reject, check);
  if (!finite)
    throw NumericError("sgd_step: non-finite gradient (diverged training)");

  size_t cursor = 0;
  auto apply = [&](double& param, const double& grad) {
    double& v = state.velocity[cursor++];
    v = momentum * v + grad;
    param -= lr * v;
  };
  for_each_param(params.top, grads.top, apply);
  if (params.reject) for_each_param(*params.reject, *grads.reject, apply);
}

FeatureVector InputScaler::apply(const FeatureVector& x) const {
  if (x.size() != mean.size())
    throw std::invalid_argument("InputScaler: dimension mismatch");
  FeatureVector out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) * scale[i];
  return out;
}

}  // namespace toprank
