// SPDX-License-Identifier: Apache-2.0
//
// Dual supervision output layer: two prediction networks (HA-Net, DS-Net) and
// two parameter networks (μ-Net, σ-Net), each a bilinear form over the entity
// pair followed by its own activation.
#pragma once

#include "dualre/corpus.hpp"
#include "dualre/encoder.hpp"
#include "dualre/ndgrad.hpp"
#include "dualre/random.hpp"

#include <array>
#include <vector>

namespace dualre {

enum class Net { HA = 0, DS = 1, Mu = 2, Sigma = 3 };

inline constexpr double kDefaultSanityBound = 1e-4;

struct OutputLayerConfig {
  Index hidden = 16;
  Index outputs = 0;  // |R|, including NA for the sentence task
  double epsilon = kDefaultSanityBound;
  Task task = Task::Document;
};

struct OutputLayerParams {
  OutputLayerConfig config;
  std::array<Tensor, 4> weight;  // each [d, |R|, d]
  std::array<Tensor, 4> bias;    // each [|R|]

  /// Uniform(-1/sqrt(d), 1/sqrt(d)); DS-Net starts as an exact copy of HA-Net.
  static OutputLayerParams init(const OutputLayerConfig& config, Rng& rng);

  Tensor& W(Net n) { return weight[static_cast<std::size_t>(n)]; }
  Tensor& b(Net n) { return bias[static_cast<std::size_t>(n)]; }
  const Tensor& W(Net n) const { return weight[static_cast<std::size_t>(n)]; }
  const Tensor& b(Net n) const { return bias[static_cast<std::size_t>(n)]; }

  std::vector<NamedTensor> parameters();
};

/// score_r = h^T W[:, r, :] t + b_r.
Var bilinear(Var h, Var t, Var W, Var b);

/// Which networks a forward pass evaluates.
enum class Heads { PredictionOnly, All };

struct PredictionVars {
  Var p_ha;
  Var p_ds;
  Var mu;
  Var sigma;
  bool has_ds = false;
  bool has_parameters = false;
};

/// Plain values of the four |R|-vectors.
struct PredictionOutput {
  Eigen::VectorXd p_ha;
  Eigen::VectorXd p_ds;
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
};

/// Prediction activation of the task: softmax (sentence) or sigmoid (document).
Var prediction_activation(Var scores, Task task);

Var network_output(Graph& graph, Var h, Var t, OutputLayerParams& params, Net net);

/// With Heads::PredictionOnly only HA-Net is evaluated.
PredictionVars forward(Graph& graph, Var h, Var t, OutputLayerParams& params, Heads heads = Heads::All);

PredictionOutput values(const PredictionVars& vars);

/// Evaluation helper on plain vectors.
PredictionOutput forward(const Eigen::VectorXd& h, const Eigen::VectorXd& t, OutputLayerParams& params);

}  // namespace dualre
