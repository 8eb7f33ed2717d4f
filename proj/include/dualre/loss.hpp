// SPDX-License-Identifier: Apache-2.0
//
// Prediction losses, the log-normal disagreement penalty, and the gradient
// calibration terms.
//
// With ℓ_r = log p^DS_r - log p^HA_r the penalty is the negative log-density of
// the ratio p^DS_r / p^HA_r under LogNormal(μ_r, σ_r²), without the constant
// log(2π)/2:
//
//   penalty = ½((ℓ_r - μ_r) / σ_r)² + ℓ_r + log σ_r
//
// Its derivative in log p^HA_r is -(1 + φ_r) with φ_r = (ℓ_r - μ_r) / σ_r², so
// for HA-Net parameters w the composite loss has gradient
//   HA label: -(1 + λ(1 + φ_r)) ∇p^HA_r / p^HA_r
//   DS label: -λ(1 + φ_r) ∇p^HA_r / p^HA_r
// when the other networks' outputs are held fixed.
#pragma once

#include "dualre/corpus.hpp"
#include "dualre/ndgrad.hpp"
#include "dualre/output_layer.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>

namespace dualre {

inline constexpr double kProbabilityClamp = 1e-12;

struct LossConfig {
  double lambda = 0.0;
  Task task = Task::Document;
  double clamp = kProbabilityClamp;
};

template <std::floating_point Scalar>
Scalar clamp_probability(Scalar p, Scalar floor = Scalar(kProbabilityClamp)) {
  return std::clamp(p, floor, Scalar(1) - floor);
}

template <std::floating_point Scalar>
Scalar categorical_ce(Scalar p_r) {
  return -std::log(clamp_probability(p_r));
}

template <std::floating_point Scalar>
Scalar disagreement_penalty(Scalar p_ha, Scalar p_ds, Scalar mu, Scalar sigma) {
  const Scalar ell = std::log(clamp_probability(p_ds)) - std::log(clamp_probability(p_ha));
  const Scalar z = (ell - mu) / sigma;
  return Scalar(0.5) * z * z + ell + std::log(sigma);
}

/// Penalty as a function of ℓ directly; minimized at ℓ = μ - σ².
template <std::floating_point Scalar>
Scalar disagreement_penalty_in_log_ratio(Scalar ell, Scalar mu, Scalar sigma) {
  const Scalar z = (ell - mu) / sigma;
  return Scalar(0.5) * z * z + ell + std::log(sigma);
}

template <std::floating_point Scalar>
Scalar phi(Scalar p_ha, Scalar p_ds, Scalar mu, Scalar sigma) {
  const Scalar ell = std::log(clamp_probability(p_ds)) - std::log(clamp_probability(p_ha));
  return (ell - mu) / (sigma * sigma);
}

/// Multiplier of -(1/p^HA_r) ∇p^HA_r in the HA-Net gradient.
template <std::floating_point Scalar>
Scalar analytic_grad_coefficient(Source source, Scalar lambda, Scalar phi_r) {
  const Scalar penalty_part = lambda * (Scalar(1) + phi_r);
  return source == Source::HA ? Scalar(1) + penalty_part : penalty_part;
}

/// Sum over r of -[r ∈ labels] log p_r - [r ∉ labels] log(1 - p_r).
double binary_ce(const Eigen::VectorXd& p, const std::vector<RelationId>& labels);

/// Composite losses on plain prediction values.
double sentence_loss(const PredictionOutput& out, const ExampleLabels& labels, const LossConfig& cfg);
double document_loss(const PredictionOutput& out, const ExampleLabels& labels, const LossConfig& cfg);

// Graph versions.

struct LossTerms {
  Var total;
  Var prediction_ha;  // scalar; zero constant when the term is inactive
  Var prediction_ds;
  Var penalty;        // unweighted penalty (λ not applied)
};

Var categorical_ce(Var p, RelationId r, double clamp = kProbabilityClamp);
Var binary_ce(Var p, const std::vector<RelationId>& labels, double clamp = kProbabilityClamp);

/// Summed penalty over the relations in `relations` (vectors of |R| entries).
Var disagreement_penalty(Var p_ha, Var p_ds, Var mu, Var sigma, const std::vector<RelationId>& relations,
                         double clamp = kProbabilityClamp);

LossTerms sentence_loss(const PredictionVars& out, const ExampleLabels& labels, const LossConfig& cfg);
LossTerms document_loss(const PredictionVars& out, const ExampleLabels& labels, const LossConfig& cfg);
LossTerms composite_loss(const PredictionVars& out, const ExampleLabels& labels, const LossConfig& cfg);

/// An output-layer input for the gradient identity check.
struct GradientExample {
  Eigen::VectorXd head;
  Eigen::VectorXd tail;
  ExampleLabels labels;
};

struct GradientIdentityReport {
  /// max |autodiff - predicted| / max(max|autodiff|, max|predicted|); 0 when both vanish.
  double discrepancy = 0.0;
  double autodiff_max = 0.0;
  double predicted_max = 0.0;
};

/// Compares the autodiff HA-Net gradient of the composite loss (DS-Net, μ-Net,
/// σ-Net outputs held constant) against the calibrated-coefficient prediction
/// built from separate autodiff passes on p^HA_r. For the document task the
/// prediction sums the coefficient terms of the labeled relations and the
/// BCE negative terms 1/(1 - p^HA_r) ∇p^HA_r of the unlabeled ones (HA only).
GradientIdentityReport verify_gradient_identities(OutputLayerParams& params, const GradientExample& example,
                                                  const LossConfig& cfg);

}  // namespace dualre
