// SPDX-License-Identifier: Apache-2.0
#include "dualre/trainer.hpp"

#include "dualre/errors.hpp"
#include "dualre/loss.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

namespace dualre {

std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::Dual: return "dual";
    case TrainMode::Multitask: return "multitask";
    case TrainMode::Single: return "single";
    case TrainMode::HAOnly: return "ha_only";
    case TrainMode::DSOnly: return "ds_only";
  }
  return "unknown";
}

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::SGD ? "sgd" : "adam"; }

TrainMode parse_train_mode(std::string_view text) {
  for (TrainMode m : {TrainMode::Dual, TrainMode::Multitask, TrainMode::Single, TrainMode::HAOnly, TrainMode::DSOnly}) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError("unknown mode '" + std::string(text) + "' (expected dual|multitask|single|ha_only|ds_only)");
}

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "sgd") return OptimizerKind::SGD;
  if (text == "adam") return OptimizerKind::Adam;
  throw ConfigError("unknown optimizer '" + std::string(text) + "' (expected sgd|adam)");
}

void TrainConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and non-negative");
  if (hidden <= 0) throw ConfigError("hidden must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (context_window < 0) throw ConfigError("context_window must be non-negative");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(adam_eps > 0.0)) {
    throw ConfigError("invalid Adam moments");
  }
  const bool shared_batches = dual_heads() || mode == TrainMode::Single;
  if (shared_batches && batch_mode == BatchMode::Mixed && batch_size % 2 != 0) {
    throw ConfigError("batch_size must be even when HA and DS examples share a batch");
  }
}

int Model::n_relations() const {
  const int outputs = static_cast<int>(output.config.outputs);
  return task() == Task::Sentence ? outputs - 1 : outputs;
}

Model Model::init(const TrainConfig& cfg, int vocab_size, int n_relations) {
  cfg.validate();
  if (vocab_size <= 0 || n_relations <= 0) throw ContractError("model: vocab_size and n_relations must be positive");
  EncoderConfig ec;
  ec.vocab_size = vocab_size;
  ec.hidden = cfg.hidden;
  ec.context_window = cfg.context_window;
  ec.score_with_projected = cfg.score_with_projected;
  ec.entity_encoder = cfg.entity_encoder;
  OutputLayerConfig oc{cfg.hidden, output_size(cfg.task, n_relations), cfg.epsilon, cfg.task};

  Rng enc_rng(mix_seed(cfg.seed, 0x656e63));
  Rng out_rng(mix_seed(cfg.seed, 0x6f7574));
  Model m;
  m.encoder = EncoderParams::init(ec, enc_rng);
  m.output = OutputLayerParams::init(oc, out_rng);
  m.mode = cfg.mode;
  m.seed = cfg.seed;
  return m;
}

std::vector<NamedTensor> Model::parameters() {
  std::vector<NamedTensor> all = encoder.parameters();
  for (NamedTensor& t : output.parameters()) all.push_back(t);
  return all;
}

TensorList Model::to_tensors() const {
  Model copy = *this;
  TensorList out;
  for (const NamedTensor& t : copy.parameters()) {
    Tensor plain(t.tensor->shape, t.tensor->data);
    out.emplace_back(t.name, std::move(plain));
  }
  const EncoderConfig& ec = encoder.config;
  out.emplace_back("meta.task", Tensor::scalar(task() == Task::Sentence ? 0.0 : 1.0));
  out.emplace_back("meta.context_window", Tensor::scalar(ec.context_window));
  out.emplace_back("meta.entity_encoder", Tensor::scalar(ec.entity_encoder == EntityEncoderKind::Average ? 1.0 : 0.0));
  out.emplace_back("meta.score_with_projected", Tensor::scalar(ec.score_with_projected ? 1.0 : 0.0));
  out.emplace_back("meta.epsilon", Tensor::scalar(output.config.epsilon));
  out.emplace_back("meta.threshold", Tensor::scalar(threshold));
  out.emplace_back("meta.mode", Tensor::scalar(static_cast<double>(mode)));
  out.emplace_back("meta.seed", Tensor::vector({static_cast<double>(seed >> 32), static_cast<double>(seed & 0xffffffffu)}));
  return out;
}

Model Model::from_tensors(const TensorList& tensors) {
  auto meta = [&](const std::string& name) { return find_tensor(tensors, "meta." + name).item(); };
  const Tensor& emb = find_tensor(tensors, "encoder.embeddings");
  const Tensor& u = find_tensor(tensors, "encoder.attention.head.U");
  const Tensor& hb = find_tensor(tensors, "output.ha.b");
  if (emb.rank() != 2 || u.rank() != 2 || hb.rank() != 1) throw IoError("checkpoint: unexpected parameter ranks");

  Model m;
  m.encoder.config.vocab_size = emb.shape[0];
  m.encoder.config.hidden = emb.shape[1];
  m.encoder.config.attention_width = u.shape[0];
  m.encoder.config.context_window = static_cast<int>(meta("context_window"));
  m.encoder.config.entity_encoder =
      meta("entity_encoder") == 1.0 ? EntityEncoderKind::Average : EntityEncoderKind::CrossAttention;
  m.encoder.config.score_with_projected = meta("score_with_projected") != 0.0;
  m.output.config.hidden = emb.shape[1];
  m.output.config.outputs = hb.shape[0];
  m.output.config.epsilon = meta("epsilon");
  m.output.config.task = meta("task") == 0.0 ? Task::Sentence : Task::Document;
  m.threshold = meta("threshold");
  const double mode_id = meta("mode");
  if (mode_id < 0 || mode_id > static_cast<double>(TrainMode::DSOnly)) throw IoError("checkpoint: unknown training mode");
  m.mode = static_cast<TrainMode>(static_cast<int>(mode_id));
  const Tensor& seed_parts = find_tensor(tensors, "meta.seed");
  if (seed_parts.size() != 2) throw IoError("checkpoint: malformed meta.seed");
  m.seed = (static_cast<std::uint64_t>(seed_parts.data[0]) << 32) | static_cast<std::uint64_t>(seed_parts.data[1]);
  for (const NamedTensor& t : m.parameters()) {
    const Tensor& stored = find_tensor(tensors, t.name);
    *t.tensor = Tensor(stored.shape, stored.data, true);
  }
  return m;
}

void save_model(const std::string& path, const Model& model) { write_checkpoint(path, model.to_tensors()); }

Model load_model(const std::string& path) { return Model::from_tensors(read_checkpoint(path)); }

namespace {

void apply_update(const TrainConfig& cfg, std::vector<NamedTensor>& params, StepState& state) {
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const NamedTensor& p : params) {
      state.m.push_back(Eigen::VectorXd::Zero(p.tensor->size()));
      state.v.push_back(Eigen::VectorXd::Zero(p.tensor->size()));
    }
  }
  ++state.step;
  const double lr = cfg.learning_rate;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i].tensor;
    if (!p.grad) continue;
    const Eigen::VectorXd& g = *p.grad;
    if (cfg.optimizer == OptimizerKind::SGD) {
      p.data -= lr * g;
      continue;
    }
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    p.data.array() -= lr * (state.m[i].array() / c1) / ((state.v[i].array() / c2).sqrt() + cfg.adam_eps);
  }
}

}  // namespace

double train_step(const TrainConfig& cfg, Model& model, StepState& state, const Dataset& train_ha,
                  const Dataset& train_ds, const Batch& batch, LossSums* sums) {
  if (batch.empty()) throw ContractError("train_step: empty batch");
  std::vector<NamedTensor> params = model.parameters();
  for (NamedTensor& p : params) p.tensor->zero_grad();

  const LossConfig loss_cfg{cfg.effective_lambda(), cfg.task, kProbabilityClamp};
  const Heads heads = cfg.dual_heads() ? Heads::All : Heads::PredictionOnly;
  Graph g;
  std::map<std::pair<Source, DocumentId>, WordVectors> cache;
  Var total = g.constant(0.0);
  for (const ExampleRef& ref : batch) {
    const bool from_ds = ref.pool == Source::DS;
    if (from_ds && sums) ++sums->ds_reads;
    const Dataset& data = from_ds ? train_ds : train_ha;
    if (ref.index >= data.examples.size()) throw ContractError("train_step: example index out of range");
    const LabeledExample& ex = data.examples[ref.index];
    const SynthDocument& doc = data.document(ex.document);
    auto it = cache.find({ref.pool, doc.id});
    if (it == cache.end()) it = cache.emplace(std::make_pair(ref.pool, doc.id), encode_text(g, doc.tokens, model.encoder)).first;
    const EntityPairVectors pair = encode_entity_pair(it->second, doc.entity(ex.head), doc.entity(ex.tail), model.encoder);
    const PredictionVars out = forward(g, pair.head, pair.tail, model.output, heads);
    const LossTerms terms = composite_loss(out, ex.labels, loss_cfg);
    total = total + terms.total;
    if (sums) {
      if (ex.labels.is_ha()) {
        sums->ha += terms.prediction_ha.item();
        ++sums->n_ha;
      } else {
        sums->ds += terms.prediction_ds.item();
        ++sums->n_ds;
      }
      sums->penalty += terms.penalty.item();
    }
  }
  Var loss = scale(total, 1.0 / static_cast<double>(batch.size()));
  g.backward(loss);
  apply_update(cfg, params, state);
  return loss.item();
}

TrainResult train(const TrainConfig& cfg, const Dataset& train_ha, const Dataset& train_ds, const Dataset& dev) {
  cfg.validate();
  const bool needs_ha = cfg.mode != TrainMode::DSOnly;
  const bool needs_ds = cfg.mode != TrainMode::HAOnly;
  if (needs_ha && train_ha.examples.empty()) throw ConfigError("mode " + std::string(to_string(cfg.mode)) + " needs HA training examples");
  if (needs_ds && train_ds.examples.empty()) throw ConfigError("mode " + std::string(to_string(cfg.mode)) + " needs DS training examples");
  if (dev.examples.empty()) throw ConfigError("dev set is empty");
  const Dataset& shape_source = needs_ha ? train_ha : train_ds;
  for (const Dataset* d : {&train_ha, &train_ds, &dev}) {
    if (d->examples.empty()) continue;
    if (d->task != cfg.task) throw ConfigError("dataset task does not match the configured task");
    if (d->n_relations != shape_source.n_relations || d->vocab_size != shape_source.vocab_size) {
      throw ConfigError("datasets disagree on relation count or vocabulary size");
    }
  }

  TrainResult result;
  result.model = Model::init(cfg, shape_source.vocab_size, shape_source.n_relations);
  Model best = result.model;
  double best_f1 = -1.0;
  StepState state;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const std::uint64_t epoch_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch));
    std::vector<Batch> batches;
    if (cfg.mode == TrainMode::HAOnly) {
      batches = build_single_pool_batches(Source::HA, train_ha.examples.size(), cfg.batch_size, epoch_seed);
    } else if (cfg.mode == TrainMode::DSOnly) {
      batches = build_single_pool_batches(Source::DS, train_ds.examples.size(), cfg.batch_size, epoch_seed);
    } else {
      batches = build_batches(train_ha.examples.size(), train_ds.examples.size(), cfg.batch_size, epoch_seed,
                              cfg.batch_mode);
    }

    LossSums sums;
    for (const Batch& batch : batches) train_step(cfg, result.model, state, train_ha, train_ds, batch, &sums);
    result.history.ds_reads += sums.ds_reads;

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss_ha = sums.n_ha ? sums.ha / static_cast<double>(sums.n_ha) : 0.0;
    rec.loss_ds = sums.n_ds ? sums.ds / static_cast<double>(sums.n_ds) : 0.0;
    const std::size_t n = sums.n_ha + sums.n_ds;
    rec.loss_penalty = n ? sums.penalty / static_cast<double>(n) : 0.0;
    if (cfg.task == Task::Document) {
      const ThresholdChoice choice = tune_threshold(result.model, dev);
      result.model.threshold = choice.threshold;
      rec.threshold = choice.threshold;
      rec.dev_f1 = choice.result.f1;
    } else {
      rec.dev_f1 = evaluate(result.model, dev).f1;
    }
    result.history.epochs.push_back(rec);

    if (rec.dev_f1 > best_f1) {
      best_f1 = rec.dev_f1;
      best = result.model;
      result.history.best_epoch = epoch;
    }
  }
  if (cfg.select_best) {
    result.model = std::move(best);
  } else {
    result.history.best_epoch = cfg.epochs;
  }
  return result;
}

// Prediction.

std::vector<PairScores> score_pairs(Model& model, const Dataset& data) {
  if (data.task != model.task()) throw ContractError("score_pairs: dataset task does not match the model");
  std::vector<PairScores> out;
  std::map<std::tuple<DocumentId, EntityId, EntityId>, std::size_t> seen;
  std::size_t i = 0;
  while (i < data.examples.size()) {
    const DocumentId doc_id = data.examples[i].document;
    std::size_t j = i;
    while (j < data.examples.size() && data.examples[j].document == doc_id) ++j;
    const SynthDocument& doc = data.document(doc_id);
    Graph g(false);
    const WordVectors words = encode_text(g, doc.tokens, model.encoder);
    for (std::size_t k = i; k < j; ++k) {
      const LabeledExample& ex = data.examples[k];
      if (!seen.emplace(std::make_tuple(doc_id, ex.head, ex.tail), out.size()).second) continue;
      const EntityPairVectors pair = encode_entity_pair(words, doc.entity(ex.head), doc.entity(ex.tail), model.encoder);
      const Var p = network_output(g, pair.head, pair.tail, model.output, Net::HA);
      out.push_back({doc_id, ex.head, ex.tail, p.value().data});
    }
    i = j;
  }
  return out;
}

std::vector<ScoredFact> scored_facts(const std::vector<PairScores>& scores, int n_relations) {
  std::vector<ScoredFact> out;
  for (const PairScores& s : scores) {
    for (RelationId r = 0; r < n_relations; ++r) {
      out.push_back({{s.document, s.head, s.tail, r}, s.p_ha[r]});
    }
  }
  return out;
}

std::vector<RelationFact> predict_facts(const std::vector<PairScores>& scores, Task task, int n_relations,
                                        double threshold) {
  std::vector<RelationFact> out;
  for (const PairScores& s : scores) {
    if (task == Task::Sentence) {
      Index best = 0;
      s.p_ha.maxCoeff(&best);
      if (best != na_relation(n_relations)) out.push_back({s.document, s.head, s.tail, static_cast<RelationId>(best)});
      continue;
    }
    for (RelationId r = 0; r < n_relations; ++r) {
      if (s.p_ha[r] >= threshold) out.push_back({s.document, s.head, s.tail, r});
    }
  }
  return out;
}

namespace {

// F1 = 2tp / (2tp + fp + fn); compared exactly as fractions.
bool better_f1(std::size_t tp_a, std::size_t den_a, std::size_t tp_b, std::size_t den_b) {
  if (den_a == 0) return false;
  if (den_b == 0) return tp_a > 0;
  return tp_a * den_b > tp_b * den_a;
}

}  // namespace

ThresholdChoice tune_threshold(std::span<const ScoredFact> scored, std::span<const RelationFact> gold) {
  if (scored.empty()) throw ContractError("tune_threshold: empty dev set");
  std::set<RelationFact> truth(gold.begin(), gold.end());
  std::vector<std::pair<double, bool>> items;
  items.reserve(scored.size());
  for (const ScoredFact& s : scored) {
    if (!std::isfinite(s.score)) throw ContractError("tune_threshold: non-finite score");
    items.emplace_back(s.score, truth.count(s.fact) > 0);
  }
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const std::size_t n_gold = truth.size();

  struct Candidate {
    double threshold;
    std::size_t tp;
    std::size_t predicted;
  };
  std::vector<Candidate> candidates;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < items.size(); ++k) {
    tp += items[k].second ? 1 : 0;
    if (k + 1 == items.size() || items[k + 1].first < items[k].first) {
      candidates.push_back({items[k].first, tp, k + 1});
    }
  }
  {
    std::size_t tp_half = 0, predicted = 0;
    for (const auto& [score, is_gold] : items) {
      if (score >= 0.5) {
        ++predicted;
        tp_half += is_gold ? 1 : 0;
      }
    }
    candidates.push_back({0.5, tp_half, predicted});
  }

  const Candidate* best = nullptr;
  std::size_t best_den = 0;
  for (const Candidate& c : candidates) {
    const std::size_t den = c.tp + c.predicted + n_gold;  // 2tp + fp + fn
    if (!best || better_f1(c.tp, den, best->tp, best_den) ||
        (!better_f1(best->tp, best_den, c.tp, den) && c.threshold < best->threshold)) {
      best = &c;
      best_den = den;
    }
  }
  ThresholdChoice choice;
  choice.threshold = best->threshold;
  choice.result = make_result(best->tp, best->predicted - best->tp, n_gold - best->tp);
  return choice;
}

ThresholdChoice tune_threshold(Model& model, const Dataset& dev) {
  if (dev.task != Task::Document) throw ContractError("tune_threshold: document task only");
  if (dev.examples.empty()) throw ContractError("tune_threshold: empty dev set");
  const std::vector<PairScores> scores = score_pairs(model, dev);
  const std::vector<ScoredFact> scored = scored_facts(scores, dev.n_relations);
  const std::vector<RelationFact> gold = gold_facts(dev);
  return tune_threshold(scored, gold);
}

EvalResult evaluate(Model& model, const Dataset& data) {
  const std::vector<PairScores> scores = score_pairs(model, data);
  const std::vector<RelationFact> predictions = predict_facts(scores, data.task, data.n_relations, model.threshold);
  const std::vector<RelationFact> gold = gold_facts(data);
  return micro_f1(predictions, gold);
}

}  // namespace dualre
