// SPDX-License-Identifier: Apache-2.0
#include "dualre/loss.hpp"

#include "dualre/errors.hpp"

#include <algorithm>

namespace dualre {

namespace {

bool contains(const std::vector<RelationId>& labels, RelationId r) {
  return std::find(labels.begin(), labels.end(), r) != labels.end();
}

RelationId single_label(const ExampleLabels& labels) {
  if (labels.relations.size() != 1) {
    throw ContractError("sentence task: expected exactly one relation label, got " +
                        std::to_string(labels.relations.size()));
  }
  return labels.relations.front();
}

void check_relations(const std::vector<RelationId>& relations, Index outputs) {
  for (RelationId r : relations) {
    if (r < 0 || r >= outputs) throw ContractError("relation id " + std::to_string(r) + " out of range");
  }
}

Eigen::VectorXd indicator(const std::vector<RelationId>& labels, Index size) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(size);
  for (RelationId r : labels) y[r] = 1.0;
  return y;
}

}  // namespace

double binary_ce(const Eigen::VectorXd& p, const std::vector<RelationId>& labels) {
  check_relations(labels, p.size());
  double loss = 0.0;
  for (Index r = 0; r < p.size(); ++r) {
    const double q = clamp_probability(p[r]);
    loss -= contains(labels, static_cast<RelationId>(r)) ? std::log(q) : std::log(1.0 - q);
  }
  return loss;
}

double sentence_loss(const PredictionOutput& out, const ExampleLabels& labels, const LossConfig& cfg) {
  const RelationId r = single_label(labels);
  check_relations(labels.relations, out.p_ha.size());
  const double prediction = labels.is_ha() ? categorical_ce(out.p_ha[r]) : categorical_ce(out.p_ds[r]);
  return prediction + cfg.lambda * disagreement_penalty(out.p_ha[r], out.p_ds[r], out.mu[r], out.sigma[r]);
}

double document_loss(const PredictionOutput& out, const ExampleLabels& labels, const LossConfig& cfg) {
  const double prediction = labels.is_ha() ? binary_ce(out.p_ha, labels.relations) : binary_ce(out.p_ds, labels.relations);
  double penalty = 0.0;
  for (RelationId r : labels.relations) {
    penalty += disagreement_penalty(out.p_ha[r], out.p_ds[r], out.mu[r], out.sigma[r]);
  }
  return prediction + cfg.lambda * penalty;
}

Var categorical_ce(Var p, RelationId r, double clamp_floor) {
  if (r < 0 || r >= p.value().size()) throw ContractError("categorical_ce: relation id out of range");
  return -sum(log(clamp(index_select(p, {r}), clamp_floor, 1.0 - clamp_floor)));
}

Var binary_ce(Var p, const std::vector<RelationId>& labels, double clamp_floor) {
  Graph& g = *p.graph;
  const Index n = p.value().size();
  check_relations(labels, n);
  Var q = clamp(p, clamp_floor, 1.0 - clamp_floor);
  Var y = g.constant(Tensor::vector(indicator(labels, n)));
  Var not_y = g.constant(Tensor::vector(Eigen::VectorXd::Ones(n) - indicator(labels, n)));
  Var one_minus_q = g.constant(Tensor::vector(Eigen::VectorXd::Ones(n))) - q;
  return -sum(y * log(q) + not_y * log(one_minus_q));
}

Var disagreement_penalty(Var p_ha, Var p_ds, Var mu, Var sigma, const std::vector<RelationId>& relations,
                         double clamp_floor) {
  Graph& g = *p_ha.graph;
  if (relations.empty()) return g.constant(0.0);
  check_relations(relations, p_ha.value().size());
  std::vector<Index> idx(relations.begin(), relations.end());
  Var ell = log(clamp(index_select(p_ds, idx), clamp_floor, 1.0 - clamp_floor)) -
            log(clamp(index_select(p_ha, idx), clamp_floor, 1.0 - clamp_floor));
  Var s = index_select(sigma, idx);
  Var z = (ell - index_select(mu, idx)) / s;
  return scale(sum(z * z), 0.5) + sum(ell) + sum(log(s));
}

namespace {

LossTerms assemble(Graph& g, Var prediction, const ExampleLabels& labels, Var penalty, const LossConfig& cfg) {
  LossTerms terms;
  Var zero = g.constant(0.0);
  terms.prediction_ha = labels.is_ha() ? prediction : zero;
  terms.prediction_ds = labels.is_ha() ? zero : prediction;
  terms.penalty = penalty;
  terms.total = prediction + scale(penalty, cfg.lambda);
  return terms;
}

}  // namespace

LossTerms sentence_loss(const PredictionVars& out, const ExampleLabels& labels, const LossConfig& cfg) {
  const RelationId r = single_label(labels);
  Graph& g = *out.p_ha.graph;
  if (!out.has_ds || !out.has_parameters) throw ContractError("sentence_loss: all four networks required");
  Var prediction = labels.is_ha() ? categorical_ce(out.p_ha, r, cfg.clamp) : categorical_ce(out.p_ds, r, cfg.clamp);
  Var penalty = disagreement_penalty(out.p_ha, out.p_ds, out.mu, out.sigma, {r}, cfg.clamp);
  return assemble(g, prediction, labels, penalty, cfg);
}

LossTerms document_loss(const PredictionVars& out, const ExampleLabels& labels, const LossConfig& cfg) {
  Graph& g = *out.p_ha.graph;
  if (!out.has_ds || !out.has_parameters) throw ContractError("document_loss: all four networks required");
  Var prediction = labels.is_ha() ? binary_ce(out.p_ha, labels.relations, cfg.clamp)
                                  : binary_ce(out.p_ds, labels.relations, cfg.clamp);
  Var penalty = disagreement_penalty(out.p_ha, out.p_ds, out.mu, out.sigma, labels.relations, cfg.clamp);
  return assemble(g, prediction, labels, penalty, cfg);
}

LossTerms composite_loss(const PredictionVars& out, const ExampleLabels& labels, const LossConfig& cfg) {
  if (out.has_ds && out.has_parameters) {
    return cfg.task == Task::Sentence ? sentence_loss(out, labels, cfg) : document_loss(out, labels, cfg);
  }
  // One prediction head fed by both sources with the plain prediction loss.
  Graph& g = *out.p_ha.graph;
  Var prediction = cfg.task == Task::Sentence ? categorical_ce(out.p_ha, single_label(labels), cfg.clamp)
                                              : binary_ce(out.p_ha, labels.relations, cfg.clamp);
  LossTerms terms;
  Var zero = g.constant(0.0);
  terms.prediction_ha = labels.is_ha() ? prediction : zero;
  terms.prediction_ds = labels.is_ha() ? zero : prediction;
  terms.penalty = zero;
  terms.total = prediction;
  return terms;
}

namespace {

Eigen::VectorXd flat_grad(const Tensor& t) {
  return t.grad ? *t.grad : Eigen::VectorXd::Zero(t.size());
}

Eigen::VectorXd ha_gradient(OutputLayerParams& params) {
  Tensor& W = params.W(Net::HA);
  Tensor& b = params.b(Net::HA);
  Eigen::VectorXd g(W.size() + b.size());
  g << flat_grad(W), flat_grad(b);
  return g;
}

}  // namespace

GradientIdentityReport verify_gradient_identities(OutputLayerParams& params, const GradientExample& example,
                                                  const LossConfig& cfg) {
  Tensor& W = params.W(Net::HA);
  Tensor& b = params.b(Net::HA);
  const bool saved_w = W.requires_grad;
  const bool saved_b = b.requires_grad;
  const bool had_wg = W.grad.has_value();
  const bool had_bg = b.grad.has_value();
  const Eigen::VectorXd saved_wg = had_wg ? *W.grad : Eigen::VectorXd();
  const Eigen::VectorXd saved_bg = had_bg ? *b.grad : Eigen::VectorXd();
  W.requires_grad = b.requires_grad = true;

  const PredictionOutput fixed = forward(example.head, example.tail, params);
  const Index outputs = fixed.p_ha.size();

  // Autodiff gradient of the loss with the non-HA outputs stopped.
  W.zero_grad();
  b.zero_grad();
  {
    Graph g;
    Var h = g.constant(Tensor::vector(example.head));
    Var t = g.constant(Tensor::vector(example.tail));
    PredictionVars vars;
    vars.p_ha = network_output(g, h, t, params, Net::HA);
    vars.p_ds = g.constant(Tensor::vector(fixed.p_ds));
    vars.mu = g.constant(Tensor::vector(fixed.mu));
    vars.sigma = g.constant(Tensor::vector(fixed.sigma));
    vars.has_ds = vars.has_parameters = true;
    g.backward(composite_loss(vars, example.labels, cfg).total);
  }
  const Eigen::VectorXd autodiff = ha_gradient(params);

  // Prediction: Σ_r c_r ∇p^HA_r from separate passes on each p^HA_r.
  std::vector<std::pair<RelationId, double>> coefficients;
  auto calibrated = [&](RelationId r) {
    const double ph = clamp_probability(fixed.p_ha[r], cfg.clamp);
    const double f = phi(fixed.p_ha[r], fixed.p_ds[r], fixed.mu[r], fixed.sigma[r]);
    return -analytic_grad_coefficient(example.labels.source, cfg.lambda, f) / ph;
  };
  if (cfg.task == Task::Sentence) {
    coefficients.emplace_back(single_label(example.labels), 0.0);
    coefficients.back().second = calibrated(coefficients.back().first);
  } else {
    for (RelationId r = 0; r < outputs; ++r) {
      if (contains(example.labels.relations, r)) {
        coefficients.emplace_back(r, calibrated(r));
      } else if (example.labels.is_ha()) {
        coefficients.emplace_back(r, 1.0 / (1.0 - clamp_probability(fixed.p_ha[r], cfg.clamp)));
      }
    }
  }

  Eigen::VectorXd predicted = Eigen::VectorXd::Zero(autodiff.size());
  for (const auto& [r, c] : coefficients) {
    W.zero_grad();
    b.zero_grad();
    Graph g;
    Var p = network_output(g, g.constant(Tensor::vector(example.head)), g.constant(Tensor::vector(example.tail)),
                           params, Net::HA);
    g.backward(sum(index_select(p, {r})));
    predicted += c * ha_gradient(params);
  }

  W.requires_grad = saved_w;
  b.requires_grad = saved_b;
  W.grad.reset();
  b.grad.reset();
  if (had_wg) W.grad = saved_wg;
  if (had_bg) b.grad = saved_bg;

  GradientIdentityReport report;
  report.autodiff_max = autodiff.cwiseAbs().maxCoeff();
  report.predicted_max = predicted.cwiseAbs().maxCoeff();
  const double scale_ref = std::max(report.autodiff_max, report.predicted_max);
  report.discrepancy = scale_ref == 0.0 ? 0.0 : (autodiff - predicted).cwiseAbs().maxCoeff() / scale_ref;
  return report;
}

}  // namespace dualre
