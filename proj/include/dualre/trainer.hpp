// SPDX-License-Identifier: Apache-2.0
//
// Training loop over the composite loss, ablation modes, optimizers,
// prediction and decision-threshold tuning.
#pragma once

#include "dualre/checkpoint.hpp"
#include "dualre/corpus.hpp"
#include "dualre/encoder.hpp"
#include "dualre/evaluator.hpp"
#include "dualre/output_layer.hpp"
#include "dualre/synth_data.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dualre {

enum class TrainMode {
  Dual,       // HA-Net, DS-Net, μ-Net, σ-Net with the disagreement penalty
  Multitask,  // Dual with λ forced to 0
  Single,     // one prediction head fed by both sources
  HAOnly,     // one head, human annotations only
  DSOnly,     // one head, distant supervision only
};

enum class OptimizerKind { SGD, Adam };

std::string_view to_string(TrainMode mode);
std::string_view to_string(OptimizerKind kind);
TrainMode parse_train_mode(std::string_view text);
OptimizerKind parse_optimizer(std::string_view text);

struct TrainConfig {
  TrainMode mode = TrainMode::Dual;
  Task task = Task::Document;
  double lambda = 0.1;
  Index hidden = 12;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 40;
  int epochs = 3;
  std::uint64_t seed = 1;
  BatchMode batch_mode = BatchMode::Mixed;
  int context_window = 1;
  EntityEncoderKind entity_encoder = EntityEncoderKind::CrossAttention;
  bool score_with_projected = false;
  double epsilon = kDefaultSanityBound;
  /// Keep the parameters of the epoch with the best dev F1 (ties: earliest).
  bool select_best = true;

  void validate() const;
  double effective_lambda() const { return mode == TrainMode::Multitask ? 0.0 : lambda; }
  /// Whether the four-network output layer is trained.
  bool dual_heads() const { return mode == TrainMode::Dual || mode == TrainMode::Multitask; }
};

struct Model {
  EncoderParams encoder;
  OutputLayerParams output;
  /// Document-task decision threshold on p^HA.
  double threshold = 0.5;
  TrainMode mode = TrainMode::Dual;
  std::uint64_t seed = 0;

  Task task() const { return output.config.task; }
  int n_relations() const;

  /// Same initialization for every mode given (seed, shapes).
  static Model init(const TrainConfig& cfg, int vocab_size, int n_relations);

  std::vector<NamedTensor> parameters();
  TensorList to_tensors() const;
  static Model from_tensors(const TensorList& tensors);
};

void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

struct EpochRecord {
  int epoch = 0;
  double loss_ha = 0.0;       // mean HA prediction loss per HA example
  double loss_ds = 0.0;       // mean DS prediction loss per DS example
  double loss_penalty = 0.0;  // mean unweighted penalty per example
  double dev_f1 = 0.0;
  std::optional<double> threshold;  // document task only
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  /// Number of DS examples fetched by the loop.
  std::size_t ds_reads = 0;
};

struct TrainResult {
  Model model;
  TrainHistory history;
};

/// Runs cfg.epochs epochs. `dev` drives threshold tuning and best-epoch selection.
TrainResult train(const TrainConfig& cfg, const Dataset& train_ha, const Dataset& train_ds, const Dataset& dev);

/// Optimizer moments, aligned with Model::parameters().
struct StepState {
  std::vector<Eigen::VectorXd> m;
  std::vector<Eigen::VectorXd> v;
  long step = 0;
};

/// Per-term loss sums over the examples seen so far.
struct LossSums {
  double ha = 0.0;
  double ds = 0.0;
  double penalty = 0.0;
  std::size_t n_ha = 0;
  std::size_t n_ds = 0;
  /// Number of DS examples fetched.
  std::size_t ds_reads = 0;
};

/// One optimizer step on a batch; returns the mean total loss.
double train_step(const TrainConfig& cfg, Model& model, StepState& state, const Dataset& train_ha,
                  const Dataset& train_ds, const Batch& batch, LossSums* sums = nullptr);

// Prediction.

struct PairScores {
  DocumentId document = 0;
  EntityId head = 0;
  EntityId tail = 0;
  Eigen::VectorXd p_ha;
};

/// HA-Net probabilities for every distinct (doc, h, t) among the examples, in first-seen order.
std::vector<PairScores> score_pairs(Model& model, const Dataset& data);

/// Relations 0..n_relations-1 of every pair with their scores (the sentence-task NA class is left out).
std::vector<ScoredFact> scored_facts(const std::vector<PairScores>& scores, int n_relations);

/// Document: p ≥ threshold. Sentence: argmax when it is not NA.
std::vector<RelationFact> predict_facts(const std::vector<PairScores>& scores, Task task, int n_relations,
                                        double threshold);

struct ThresholdChoice {
  double threshold = 0.5;
  EvalResult result;
};

/// Maximizes micro-F1 over candidates {distinct scores} ∪ {0.5}, predicting
/// p ≥ θ; ties go to the lowest threshold.
ThresholdChoice tune_threshold(std::span<const ScoredFact> scored, std::span<const RelationFact> gold);

ThresholdChoice tune_threshold(Model& model, const Dataset& dev);

/// Micro-F1 of the model on a dataset (sentence: argmax; document: model.threshold).
EvalResult evaluate(Model& model, const Dataset& data);

}  // namespace dualre
