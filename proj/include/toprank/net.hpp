#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "toprank/common.hpp"

namespace toprank {

enum class Activation { ReluTop, SigmoidReject };

/// Parameters of one two-layer branch: hidden = relu(W1^T x + b1),
/// out = W2^T hidden + b2 (optionally squashed by a sigmoid).
struct BranchParams {
  int in_dim = 0;
  int hidden_dim = 0;
  std::vector<double> w1;  // in_dim x hidden_dim, row-major
  std::vector<double> b1;  // hidden_dim
  std::vector<double> w2;  // hidden_dim
  double b2 = 0.0;
  Activation activation = Activation::ReluTop;
};

/// Two-branch model: ranking branch t(.) and optional rejection branch r(.).
/// The branches share nothing; perturbing one never changes the other.
struct ModelParams {
  BranchParams top;
  std::optional<BranchParams> reject;
};

/// Intermediate values of one forward call, consumed by backward().
struct BranchCache {
  std::vector<double> input;
  std::vector<double> pre_hidden;  // W1^T x + b1, before relu
  double output = 0.0;             // branch output (score, or sigmoid weight)
};

struct BranchGrads {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
};

struct ParamGrads {
  BranchGrads top;
  std::optional<BranchGrads> reject;
};

/// Glorot-uniform weights (scale sqrt(6/(fan_in+fan_out)) per layer), zero
/// biases. Identical seed gives bit-identical parameters.
BranchParams init_branch(int in_dim, int hidden_dim, Activation activation,
                         uint64_t seed);

/// Ranking score t(x), unbounded. Requires activation == ReluTop.
double forward_top(const BranchParams& params, const FeatureVector& x,
                   BranchCache* cache = nullptr);

/// Rejection weight r(x) = sigmoid(logit), strictly inside (0, 1).
/// Requires activation == SigmoidReject.
double forward_reject(const BranchParams& params, const FeatureVector& x,
                      BranchCache* cache = nullptr);

/// Accumulates exact analytic gradients for one batch. top_caches pairs with
/// d_score elementwise (every scored sample); reject_caches pairs with
/// d_weight (negatives only; both empty when the model has no reject branch).
ParamGrads backward(const ModelParams& params,
                    const std::vector<BranchCache>& top_caches,
                    const std::vector<double>& d_score,
                    const std::vector<BranchCache>& reject_caches,
                    const std::vector<double>& d_weight);

/// Momentum buffer for sgd_step; starts at zero velocities.
struct SgdState {
  std::vector<double> velocity;  // flat over all parameters, lazily sized
};

/// v <- momentum*v + g; params <- params - lr*v. Throws NumericError on
/// non-finite gradients (diverged training).
void sgd_step(ModelParams& params, const ParamGrads& grads, double lr,
              double momentum, SgdState& state);

ParamGrads zero_grads_like(const ModelParams& params);

/// Optional per-dimension affine input transform fitted on training data.
struct InputScaler {
  std::vector<double> mean;
  std::vector<double> scale;  // multiplicative, 1/stddev
  FeatureVector apply(const FeatureVector& x) const;
};

/// A trained model: parameters, the loss variant that produced them, and the
/// input scaler when standardization was enabled.
struct Model {
  ModelParams params;
  LossVariant variant = LossVariant::Top;
  std::optional<InputScaler> scaler;
};

/// Serializes to a single JSON file (format version, dims, variant, each
/// layer's shape and row-major weights). Doubles round-trip bit-exactly.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace toprank
