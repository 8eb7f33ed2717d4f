// SPDX-License-Identifier: Apache-2.0
#include "dualre/errors.hpp"
#include "dualre/loss.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace dualre;

namespace {

constexpr double kLn2 = std::numbers::ln2;

PredictionOutput make_output(Eigen::VectorXd p_ha, Eigen::VectorXd p_ds, Eigen::VectorXd mu, Eigen::VectorXd sigma) {
  return {std::move(p_ha), std::move(p_ds), std::move(mu), std::move(sigma)};
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

PredictionVars as_vars(Graph& g, const PredictionOutput& o) {
  PredictionVars v;
  v.p_ha = g.constant(Tensor::vector(o.p_ha));
  v.p_ds = g.constant(Tensor::vector(o.p_ds));
  v.mu = g.constant(Tensor::vector(o.mu));
  v.sigma = g.constant(Tensor::vector(o.sigma));
  v.has_ds = v.has_parameters = true;
  return v;
}

}  // namespace

TEST_CASE("categorical cross-entropy") {
  CHECK(categorical_ce(0.5) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(categorical_ce(1.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(categorical_ce(0.1) == doctest::Approx(2.302585).epsilon(1e-6));
  CHECK(std::isfinite(categorical_ce(0.0)));
}

TEST_CASE("binary cross-entropy") {
  CHECK(binary_ce(vec({0.5, 0.5}), {0}) == doctest::Approx(1.386294).epsilon(1e-6));
  CHECK(binary_ce(vec({0.5, 0.5, 0.5}), {}) == doctest::Approx(2.079442).epsilon(1e-6));
  const Eigen::VectorXd p = vec({0.9, 0.2, 0.35, 0.61});
  const double direct = -std::log(0.9) - std::log(0.8) - std::log(0.35) - std::log(1 - 0.61);
  CHECK(binary_ce(p, {0, 2}) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("disagreement penalty and phi") {
  CHECK(disagreement_penalty(0.4, 0.4, 0.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(disagreement_penalty(0.25, 0.5, kLn2, 1.0) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(disagreement_penalty(0.2, 0.4, 0.0, 0.5) == doctest::Approx(0.960906).epsilon(1e-6));
  CHECK(phi(0.3, 0.3, 0.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(phi(0.3, 0.6, 0.0, 1.0) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(phi(0.6, 0.3, 0.0, 2.0) == doctest::Approx(-0.173287).epsilon(1e-6));
  CHECK(disagreement_penalty(0.25f, 0.5f, static_cast<float>(kLn2), 1.0f) == doctest::Approx(0.693147).epsilon(1e-5));
}

TEST_CASE("calibrated gradient coefficient") {
  CHECK(analytic_grad_coefficient(Source::HA, 0.0, 3.0) == 1.0);
  CHECK(analytic_grad_coefficient(Source::DS, 0.0, 3.0) == 0.0);
  CHECK(analytic_grad_coefficient(Source::HA, 0.1, 1.0) == doctest::Approx(1.2));
  CHECK(analytic_grad_coefficient(Source::DS, 0.5, -1.0) == 0.0);
}

TEST_CASE("sentence loss") {
  LossConfig cfg;
  cfg.task = Task::Sentence;
  const PredictionOutput even = make_output(vec({0.5, 0.5}), vec({0.5, 0.5}), vec({0, 0}), vec({1, 1}));
  CHECK(sentence_loss(even, {Source::HA, {0}}, cfg) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(sentence_loss(even, {Source::DS, {1}}, cfg) == doctest::Approx(0.693147).epsilon(1e-6));

  cfg.lambda = 1.0;
  const PredictionOutput worked = make_output(vec({0.25, 0.75}), vec({0.5, 0.5}), vec({kLn2, 0}), vec({1, 1}));
  CHECK(sentence_loss(worked, {Source::HA, {0}}, cfg) == doctest::Approx(2.079442).epsilon(1e-6));

  Graph g;
  const LossTerms terms = sentence_loss(as_vars(g, worked), {Source::HA, {0}}, cfg);
  CHECK(terms.total.item() == doctest::Approx(2.079442).epsilon(1e-6));
  CHECK(terms.penalty.item() == doctest::Approx(kLn2));
  CHECK(terms.prediction_ds.item() == 0.0);
  CHECK_THROWS_AS(sentence_loss(worked, {Source::HA, {0, 1}}, cfg), ContractError);
}

TEST_CASE("document loss") {
  LossConfig cfg;
  cfg.lambda = 0.7;
  const PredictionOutput o = make_output(vec({0.3, 0.8, 0.55}), vec({0.6, 0.7, 0.1}), vec({0.2, -0.4, 0.9}),
                                         vec({0.5, 1.3, 0.8}));

  const double empty = document_loss(o, {Source::HA, {}}, cfg);
  CHECK(empty == doctest::Approx(binary_ce(o.p_ha, {})));

  LossConfig plain;
  const PredictionOutput single = make_output(vec({0.5}), vec({0.5}), vec({0}), vec({1}));
  CHECK(document_loss(single, {Source::HA, {0}}, plain) == doctest::Approx(0.693147).epsilon(1e-6));

  for (Source src : {Source::HA, Source::DS}) {
    const std::vector<RelationId> labels = {0, 2};
    const double bce = binary_ce(src == Source::HA ? o.p_ha : o.p_ds, labels);
    double pen = 0.0;
    for (RelationId r : labels) pen += disagreement_penalty(o.p_ha[r], o.p_ds[r], o.mu[r], o.sigma[r]);
    const double expected = bce + cfg.lambda * pen;
    CHECK(document_loss(o, {src, labels}, cfg) == doctest::Approx(expected).epsilon(1e-12));
    Graph g;
    CHECK(document_loss(as_vars(g, o), {src, labels}, cfg).total.item() == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("graph penalty differentiates like the closed form") {
  Tensor ph = Tensor::vector({0.3, 0.6});
  Tensor pd = Tensor::vector({0.5, 0.2});
  Tensor mu = Tensor::vector({0.1, -0.3});
  Tensor sg = Tensor::vector({0.7, 1.1});
  Tensor* inputs[] = {&ph, &pd, &mu, &sg};
  auto build = [](Graph&, std::span<const Var> v) { return disagreement_penalty(v[0], v[1], v[2], v[3], {0, 1}); };
  CHECK(grad_check(build, inputs, 1e-7) <= 1e-6);

  // d penalty / d log p_ha = -(1 + phi)
  Tensor lp = Tensor::vector({std::log(0.3)});
  lp.requires_grad = true;
  Graph g;
  Var p = exp(g.leaf(lp));
  Var pen = disagreement_penalty(p, g.constant(Tensor::vector({0.5})), g.constant(Tensor::vector({0.1})),
                                 g.constant(Tensor::vector({0.7})), {0});
  g.backward(pen);
  CHECK((*lp.grad)[0] == doctest::Approx(-(1.0 + phi(0.3, 0.5, 0.1, 0.7))).epsilon(1e-12));
}

TEST_CASE("gradient identities hold on random output layers") {
  Rng rng(21);
  for (Task task : {Task::Sentence, Task::Document}) {
    OutputLayerConfig oc;
    oc.hidden = 5;
    oc.outputs = output_size(task, 3);
    oc.task = task;
    OutputLayerParams params = OutputLayerParams::init(oc, rng);
    params.W(Net::DS) = uniform_tensor({5, oc.outputs, 5}, 0.5, rng);
    for (double lambda : {0.0, 1e-3, 0.1, 1.0}) {
      for (Source src : {Source::HA, Source::DS}) {
        GradientExample ex;
        ex.head = uniform_tensor({5}, 1.0, rng, false).data;
        ex.tail = uniform_tensor({5}, 1.0, rng, false).data;
        ex.labels = {src, task == Task::Sentence ? std::vector<RelationId>{1} : std::vector<RelationId>{0, 2}};
        LossConfig cfg;
        cfg.task = task;
        cfg.lambda = lambda;
        const GradientIdentityReport rep = verify_gradient_identities(params, ex, cfg);
        CHECK(rep.discrepancy <= 1e-8);
        if (src == Source::HA || lambda > 0.0) CHECK(rep.autodiff_max > 0.0);
      }
    }
  }
}
