// SPDX-License-Identifier: Apache-2.0
#include "dualre/errors.hpp"
#include "dualre/output_layer.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace dualre;

namespace {

OutputLayerParams zero_params(Task task, Index d, Index r) {
  OutputLayerConfig cfg;
  cfg.hidden = d;
  cfg.outputs = r;
  cfg.task = task;
  Rng rng(1);
  OutputLayerParams p = OutputLayerParams::init(cfg, rng);
  for (std::size_t k = 0; k < 4; ++k) {
    p.weight[k].data.setZero();
    p.bias[k].data.setZero();
  }
  return p;
}

}  // namespace

TEST_CASE("bilinear form matches an explicit sum") {
  Rng rng(6);
  Tensor h = uniform_tensor({3}, 1.0, rng, false);
  Tensor t = uniform_tensor({2}, 1.0, rng, false);
  Tensor W = uniform_tensor({3, 4, 2}, 1.0, rng, false);
  Tensor b = uniform_tensor({4}, 1.0, rng, false);
  Graph g;
  const Eigen::VectorXd s = bilinear(g.leaf(h), g.leaf(t), g.leaf(W), g.leaf(b)).value().data;
  for (Index r = 0; r < 4; ++r) {
    double expected = b.data[r];
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 2; ++j) expected += h.data[i] * W.data[(i * 4 + r) * 2 + j] * t.data[j];
    CHECK(s[r] == doctest::Approx(expected).epsilon(1e-13));
  }

  Tensor zero = Tensor::zeros({3});
  Tensor zt = Tensor::zeros({2});
  Graph g2;
  CHECK(bilinear(g2.leaf(zero), g2.leaf(zt), g2.leaf(W), g2.leaf(b)).value().data == b.data);
  CHECK_THROWS_AS(bilinear(g2.leaf(zt), g2.leaf(zt), g2.leaf(W), g2.leaf(b)), ContractError);
}

TEST_CASE("zero parameters give neutral outputs") {
  OutputLayerParams s = zero_params(Task::Sentence, 4, 3);
  const Eigen::VectorXd h = Eigen::VectorXd::Ones(4);
  const PredictionOutput so = forward(h, h, s);
  for (Index r = 0; r < 3; ++r) {
    CHECK(so.p_ha[r] == doctest::Approx(1.0 / 3.0));
    CHECK(so.p_ds[r] == doctest::Approx(1.0 / 3.0));
    CHECK(so.mu[r] == 0.0);
    CHECK(so.sigma[r] == doctest::Approx(std::numbers::ln2 + kDefaultSanityBound));
  }
  OutputLayerParams d = zero_params(Task::Document, 4, 2);
  const PredictionOutput dout = forward(h, h, d);
  CHECK(dout.p_ha[0] == 0.5);
  CHECK(dout.p_ds[1] == 0.5);
}

TEST_CASE("mu is bounded and sigma stays above epsilon") {
  OutputLayerParams p = zero_params(Task::Document, 2, 2);
  p.b(Net::Mu).data << 50.0, -50.0;
  p.b(Net::Sigma).data << -30.0, 40.0;
  const PredictionOutput o = forward(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), p);
  CHECK(std::abs(o.mu[0]) <= 1.0);
  CHECK(std::abs(o.mu[1]) <= 1.0);
  CHECK(o.sigma[0] >= kDefaultSanityBound);
  CHECK(o.sigma[0] == doctest::Approx(kDefaultSanityBound).epsilon(1e-8));
  CHECK(o.sigma[1] == doctest::Approx(40.0 + kDefaultSanityBound));
}

TEST_CASE("DS-Net starts as a copy of HA-Net") {
  OutputLayerConfig cfg;
  cfg.hidden = 3;
  cfg.outputs = 4;
  Rng rng(8);
  OutputLayerParams p = OutputLayerParams::init(cfg, rng);
  CHECK(p.W(Net::DS).data == p.W(Net::HA).data);
  CHECK(p.b(Net::DS).data == p.b(Net::HA).data);
  CHECK(p.W(Net::Mu).data != p.W(Net::Sigma).data);
  CHECK(p.parameters().size() == 8);
}

TEST_CASE("prediction-only forward skips the other networks") {
  OutputLayerParams p = zero_params(Task::Document, 2, 2);
  Graph g;
  Var h = g.constant(Tensor::vector({1.0, 2.0}));
  PredictionVars v = forward(g, h, h, p, Heads::PredictionOnly);
  CHECK_FALSE(v.has_ds);
  CHECK_FALSE(v.has_parameters);
  const PredictionOutput o = values(v);
  CHECK(o.p_ha.size() == 2);
  CHECK(o.p_ds.size() == 0);
}

TEST_CASE("output layer gradients match finite differences") {
  for (Task task : {Task::Sentence, Task::Document}) {
    OutputLayerConfig cfg;
    cfg.hidden = 3;
    cfg.outputs = 3;
    cfg.task = task;
    Rng rng(12);
    OutputLayerParams p = OutputLayerParams::init(cfg, rng);
    Tensor h = uniform_tensor({3}, 1.0, rng);
    Tensor t = uniform_tensor({3}, 1.0, rng);
    std::vector<Tensor*> inputs = {&h, &t};
    for (NamedTensor& nt : p.parameters()) inputs.push_back(nt.tensor);
    auto build = [&p](Graph& g, std::span<const Var> v) {
      PredictionVars o = forward(g, v[0], v[1], p);
      return sum(log(o.p_ha)) + sum(o.p_ds * o.mu) + sum(log(o.sigma));
    };
    CHECK(grad_check(build, inputs, 1e-6) <= 1e-6);
  }
}
