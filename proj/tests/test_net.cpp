#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "toprank/net.hpp"
#include "toprank/rng.hpp"

using namespace toprank;

TEST_CASE("init_branch is seed-deterministic with Glorot-bounded weights") {
  const BranchParams a = init_branch(2, 4, Activation::ReluTop, 42);
  const BranchParams b = init_branch(2, 4, Activation::ReluTop, 42);
  CHECK(a.w1 == b.w1);
  CHECK(a.w2 == b.w2);
  CHECK(a.b1 == b.b1);
  CHECK(a.b2 == b.b2);

  const BranchParams c = init_branch(2, 4, Activation::ReluTop, 43);
  CHECK(a.w1 != c.w1);

  const double bound1 = std::sqrt(6.0 / (2 + 4));
  for (double w : a.w1) CHECK(std::fabs(w) <= bound1);
  const double bound2 = std::sqrt(6.0 / (4 + 1));
  for (double w : a.w2) CHECK(std::fabs(w) <= bound2);
  for (double v : a.b1) CHECK(v == 0.0);
  CHECK(a.b2 == 0.0);

  CHECK_THROWS_AS(init_branch(0, 4, Activation::ReluTop, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(init_branch(4, 0, Activation::ReluTop, 1),
                  std::invalid_argument);
}

TEST_CASE("forward_top hand-evaluated example") {
  BranchParams p;
  p.in_dim = 2;
  p.hidden_dim = 2;
  p.activation = Activation::ReluTop;
  p.w1 = {1.0, 0.0, 0.0, 1.0};  // identity
  p.b1 = {0.0, 0.0};
  p.w2 = {1.0, 1.0};
  p.b2 = 0.0;
  // relu(1, -2) = (1, 0) -> score 1
  CHECK(forward_top(p, {1.0, -2.0}) == 1.0);

  BranchParams zero = p;
  zero.w1.assign(4, 0.0);
  zero.w2.assign(2, 0.0);
  CHECK(forward_top(zero, {3.0, -7.0}) == 0.0);

  CHECK_THROWS_AS(forward_top(p, {1.0, 2.0, 3.0}), std::invalid_argument);
  p.activation = Activation::SigmoidReject;
  CHECK_THROWS_AS(forward_top(p, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("forward_reject output range and saturation") {
  BranchParams p = init_branch(3, 4, Activation::SigmoidReject, 7);
  CHECK(forward_reject(p, {0.0, 0.0, 0.0}) == 0.5);  // zero logit

  // force the logit to +-100 through the second-layer bias
  p.w1.assign(p.w1.size(), 0.0);
  p.w2.assign(p.w2.size(), 0.0);
  p.b2 = 100.0;
  const double hi = forward_reject(p, {1.0, 1.0, 1.0});
  CHECK(hi < 1.0);
  CHECK(hi > 0.999999);
  p.b2 = -100.0;
  const double lo = forward_reject(p, {1.0, 1.0, 1.0});
  CHECK(lo > 0.0);
  CHECK(lo < 1e-40);
  p.b2 = -10000.0;  // saturates past double resolution; must stay inside (0,1)
  CHECK(forward_reject(p, {1.0, 1.0, 1.0}) > 0.0);

  CHECK_THROWS_AS(forward_reject(init_branch(2, 2, Activation::ReluTop, 1),
                                 FeatureVector{1.0, 2.0}),
                  std::invalid_argument);
}

TEST_CASE("branches are isolated: touching one never moves the other") {
  Rng rng(5);
  ModelParams params;
  params.top = init_branch(4, 6, Activation::ReluTop, 11);
  params.reject = init_branch(4, 6, Activation::SigmoidReject, 12);
  FeatureVector x(4);
  for (double& v : x) v = rng.normal();

  const double score = forward_top(params.top, x);
  const double weight = forward_reject(*params.reject, x);
  for (double& w : params.reject->w1) w += 10.0;
  params.reject->b2 = -3.0;
  CHECK(forward_top(params.top, x) == score);

  params.top = init_branch(4, 6, Activation::ReluTop, 99);
  CHECK(forward_reject(*params.reject, x) != weight);  // its own params moved
  params.reject = init_branch(4, 6, Activation::SigmoidReject, 12);
  CHECK(forward_reject(*params.reject, x) == weight);
}

TEST_CASE("backward: zero upstream gives zero grads") {
  ModelParams params;
  params.top = init_branch(3, 5, Activation::ReluTop, 21);
  FeatureVector x = {0.5, -0.25, 1.0};
  BranchCache cache;
  forward_top(params.top, x, &cache);
  const ParamGrads g = backward(params, {cache}, {0.0}, {}, {});
  for (double v : oracles::flatten_grads(g)) CHECK(v == 0.0);
}

TEST_CASE("backward: sum-of-scores gradients match finite differences") {
  Rng rng(31);
  ModelParams params;
  params.top = init_branch(2, 4, Activation::ReluTop, 31);
  for (double& b : params.top.b1) b = 0.2 * rng.normal();
  std::vector<FeatureVector> xs;
  for (int i = 0; i < 5; ++i) xs.push_back({rng.normal(), rng.normal()});

  auto total = [&](const ModelParams& p) {
    double sum = 0.0;
    for (const auto& x : xs) sum += forward_top(p.top, x);
    return sum;
  };
  std::vector<BranchCache> caches(xs.size());
  for (size_t i = 0; i < xs.size(); ++i)
    forward_top(params.top, xs[i], &caches[i]);
  const std::vector<double> flat = oracles::flatten_grads(
      backward(params, caches, std::vector<double>(xs.size(), 1.0), {}, {}));

  const std::vector<double*> ptrs = oracles::param_ptrs(params);
  const double h = 1e-5;
  for (size_t i = 0; i < ptrs.size(); ++i) {
    const double saved = *ptrs[i];
    *ptrs[i] = saved + h;
    const double fp = total(params);
    *ptrs[i] = saved - h;
    const double fm = total(params);
    *ptrs[i] = saved;
    CHECK(oracles::rel_err(flat[i], (fp - fm) / (2 * h)) < 1e-6);
  }
}

TEST_CASE("backward: a relu-dead hidden unit gets no incoming gradient") {
  BranchParams top = init_branch(2, 3, Activation::ReluTop, 77);
  // drive unit 1 permanently negative
  top.w1[0 * 3 + 1] = 0.0;
  top.w1[1 * 3 + 1] = 0.0;
  top.b1[1] = -5.0;
  ModelParams params;
  params.top = top;

  std::vector<FeatureVector> xs = {{1.0, 2.0}, {-0.5, 0.25}, {3.0, -1.0}};
  std::vector<BranchCache> caches(xs.size());
  for (size_t i = 0; i < xs.size(); ++i)
    forward_top(params.top, xs[i], &caches[i]);
  const ParamGrads g =
      backward(params, caches, std::vector<double>(xs.size(), 1.0), {}, {});
  CHECK(g.top.w1[0 * 3 + 1] == 0.0);
  CHECK(g.top.w1[1 * 3 + 1] == 0.0);
  CHECK(g.top.b1[1] == 0.0);
  CHECK(g.top.w2[1] == 0.0);
  CHECK(g.top.b2 != 0.0);  // the rest of the net still learns
}

TEST_CASE("sgd_step definition, zero lr, and momentum unrolling") {
  ModelParams params;
  params.top = init_branch(1, 1, Activation::ReluTop, 3);
  params.top.w1 = {0.0};
  params.top.w2 = {0.0};

  ParamGrads g = zero_grads_like(params);
  g.top.b2 = 1.0;

  SgdState state;
  ModelParams frozen = params;
  sgd_step(frozen, g, 0.0, 0.0, state);  // zero step
  CHECK(frozen.top.b2 == params.top.b2);

  SgdState state2;
  sgd_step(params, g, 0.1, 0.0, state2);
  CHECK(params.top.b2 == doctest::Approx(-0.1).epsilon(1e-15));

  // momentum 0.9, two unit grads: second velocity is 1.9
  ModelParams m;
  m.top = init_branch(1, 1, Activation::ReluTop, 3);
  m.top.b2 = 0.0;
  SgdState state3;
  ParamGrads g2 = zero_grads_like(m);
  g2.top.b2 = 1.0;
  sgd_step(m, g2, 0.1, 0.9, state3);
  const double after_one = m.top.b2;
  sgd_step(m, g2, 0.1, 0.9, state3);
  CHECK(after_one == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(m.top.b2 - after_one == doctest::Approx(-0.1 * 1.9).epsilon(1e-12));

  g2.top.b2 = std::nan("");
  ModelParams before = m;
  CHECK_THROWS_AS(sgd_step(m, g2, 0.1, 0.9, state3), NumericError);
  CHECK(m.top.b2 == before.top.b2);  // rejected step leaves params intact
}

TEST_CASE("model save/load round-trips forward outputs bit-exactly") {
  Rng rng(61);
  Model model;
  model.variant = LossVariant::TopRej;
  model.params.top = init_branch(5, 8, Activation::ReluTop, 100);
  model.params.reject = init_branch(5, 8, Activation::SigmoidReject, 101);
  for (double& b : model.params.top.b1) b = rng.normal();
  InputScaler scaler;
  for (int i = 0; i < 5; ++i) {
    scaler.mean.push_back(rng.normal());
    scaler.scale.push_back(std::exp(rng.normal()));
  }
  model.scaler = scaler;

  const auto path =
      (std::filesystem::temp_directory_path() / "toprank_model_rt.json").string();
  save_model(model, path);
  const Model loaded = load_model(path);
  CHECK(loaded.variant == model.variant);
  REQUIRE(loaded.params.reject.has_value());
  REQUIRE(loaded.scaler.has_value());

  for (int trial = 0; trial < 20; ++trial) {
    FeatureVector x(5);
    for (double& v : x) v = 3.0 * rng.normal();
    const FeatureVector xs = model.scaler->apply(x);
    CHECK(forward_top(loaded.params.top, loaded.scaler->apply(x)) ==
          forward_top(model.params.top, xs));
    CHECK(forward_reject(*loaded.params.reject, xs) ==
          forward_reject(*model.params.reject, xs));
  }
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), DataError);
}

TEST_CASE("full-model gradient check across all variants") {
  Rng rng(407);
  for (LossVariant variant :
       {LossVariant::Top, LossVariant::TopRej, LossVariant::TopLOF,
        LossVariant::TopRejLOF}) {
    for (int trial = 0; trial < 3; ++trial) {
      oracles::Instance inst = oracles::random_instance(rng, variant);
      CHECK(oracles::max_grad_error(inst.params, inst.probe) < 1e-4);
    }
  }
}
