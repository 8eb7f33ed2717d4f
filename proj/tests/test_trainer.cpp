// SPDX-License-Identifier: Apache-2.0
#include "dualre/errors.hpp"
#include "dualre/trainer.hpp"

#include <doctest.h>

using namespace dualre;

namespace {

const GeneratedData& tiny_data(Task task) {
  auto make = [](Task t) {
    GenConfig gc;
    gc.task = t;
    gc.n_entities = 20;
    gc.n_relations = 3;
    gc.kb_triples = 30;
    gc.n_train_ha = 12;
    gc.n_train_ds = 16;
    gc.n_dev = 8;
    gc.n_test = 8;
    gc.template_variants = 2;
    set_target_inflations(gc, std::vector<double>{0.5, 1.0, 3.0});
    return generate_datasets(gc);
  };
  static const GeneratedData doc = make(Task::Document);
  static const GeneratedData sent = make(Task::Sentence);
  return task == Task::Document ? doc : sent;
}

TrainConfig tiny_config(Task task, TrainMode mode) {
  TrainConfig tc;
  tc.task = task;
  tc.mode = mode;
  tc.hidden = 4;
  tc.batch_size = 8;
  tc.epochs = 2;
  tc.seed = 5;
  return tc;
}

bool same_parameters(Model& a, Model& b) {
  std::vector<NamedTensor> pa = a.parameters();
  std::vector<NamedTensor> pb = b.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].name != pb[i].name || pa[i].tensor->data != pb[i].tensor->data) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("mode and optimizer names round trip") {
  for (TrainMode m : {TrainMode::Dual, TrainMode::Multitask, TrainMode::Single, TrainMode::HAOnly, TrainMode::DSOnly})
    CHECK(parse_train_mode(to_string(m)) == m);
  CHECK(parse_optimizer("sgd") == OptimizerKind::SGD);
  CHECK_THROWS_AS(parse_train_mode("triple"), ConfigError);
}

TEST_CASE("configuration validation") {
  TrainConfig tc = tiny_config(Task::Document, TrainMode::Dual);
  tc.batch_size = 7;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
  tc.mode = TrainMode::HAOnly;
  CHECK_NOTHROW(tc.validate());
  tc.lambda = -1.0;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
  CHECK(tiny_config(Task::Document, TrainMode::Multitask).effective_lambda() == 0.0);
}

TEST_CASE("initialization does not depend on the mode") {
  Model a = Model::init(tiny_config(Task::Document, TrainMode::Dual), 50, 3);
  Model b = Model::init(tiny_config(Task::Document, TrainMode::DSOnly), 50, 3);
  CHECK(same_parameters(a, b));
}

TEST_CASE("one SGD step moves every parameter by -lr * grad") {
  const GeneratedData& d = tiny_data(Task::Document);
  TrainConfig tc = tiny_config(Task::Document, TrainMode::Dual);
  tc.optimizer = OptimizerKind::SGD;
  tc.learning_rate = 0.3;
  Model model = Model::init(tc, d.train_ha.vocab_size, d.train_ha.n_relations);
  Model before = model;
  StepState state;
  const Batch batch = build_batches(d.train_ha.examples.size(), d.train_ds.examples.size(), 4, 1).front();
  train_step(tc, model, state, d.train_ha, d.train_ds, batch);
  std::vector<NamedTensor> after = model.parameters();
  std::vector<NamedTensor> init = before.parameters();
  bool any_grad = false;
  for (std::size_t i = 0; i < after.size(); ++i) {
    const Tensor& t = *after[i].tensor;
    if (!t.grad) {
      CHECK(t.data == init[i].tensor->data);
      continue;
    }
    any_grad = true;
    const Eigen::VectorXd expected = init[i].tensor->data - tc.learning_rate * *t.grad;
    CHECK((t.data - expected).lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + expected.lpNorm<Eigen::Infinity>()));
  }
  CHECK(any_grad);
}

TEST_CASE("the penalty couples HA-Net to DS data and trains mu and sigma") {
  const GeneratedData& d = tiny_data(Task::Document);
  Batch ds_batch;
  Batch ha_batch;
  for (std::size_t i = 0; i < d.train_ds.examples.size(); ++i)
    if (!d.train_ds.examples[i].labels.relations.empty()) ds_batch.push_back({Source::DS, i});
  for (std::size_t i = 0; i < d.train_ha.examples.size(); ++i)
    if (!d.train_ha.examples[i].labels.relations.empty()) ha_batch.push_back({Source::HA, i});
  REQUIRE_FALSE(ds_batch.empty());
  REQUIRE_FALSE(ha_batch.empty());

  for (double lambda : {0.0, 0.5}) {
    TrainConfig tc = tiny_config(Task::Document, TrainMode::Dual);
    tc.lambda = lambda;
    tc.optimizer = OptimizerKind::SGD;
    tc.learning_rate = 0.1;
    {
      Model m = Model::init(tc, d.train_ds.vocab_size, d.train_ds.n_relations);
      const Tensor before = m.output.W(Net::HA);
      StepState state;
      train_step(tc, m, state, d.train_ha, d.train_ds, ds_batch);
      CHECK((m.output.W(Net::HA).data != before.data) == (lambda > 0.0));
    }
    {
      Model m = Model::init(tc, d.train_ha.vocab_size, d.train_ha.n_relations);
      const Tensor mu = m.output.W(Net::Mu);
      const Tensor sigma = m.output.b(Net::Sigma);
      StepState state;
      train_step(tc, m, state, d.train_ha, d.train_ds, ha_batch);
      CHECK((m.output.W(Net::Mu).data != mu.data) == (lambda > 0.0));
      CHECK((m.output.b(Net::Sigma).data != sigma.data) == (lambda > 0.0));
    }
  }
}

TEST_CASE("multitask equals dual training with zero lambda") {
  for (Task task : {Task::Document, Task::Sentence}) {
    const GeneratedData& d = tiny_data(task);
    TrainConfig multi = tiny_config(task, TrainMode::Multitask);
    multi.lambda = 0.7;
    TrainConfig dual = tiny_config(task, TrainMode::Dual);
    dual.lambda = 0.0;
    TrainResult a = train(multi, d.train_ha, d.train_ds, d.dev);
    TrainResult b = train(dual, d.train_ha, d.train_ds, d.dev);
    CHECK(same_parameters(a.model, b.model));
    REQUIRE(a.history.epochs.size() == b.history.epochs.size());
    for (std::size_t e = 0; e < a.history.epochs.size(); ++e) {
      CHECK(a.history.epochs[e].loss_ha == b.history.epochs[e].loss_ha);
      CHECK(a.history.epochs[e].dev_f1 == b.history.epochs[e].dev_f1);
    }
  }
}

TEST_CASE("training is deterministic and ablations read the right pools") {
  const GeneratedData& d = tiny_data(Task::Document);
  TrainResult a = train(tiny_config(Task::Document, TrainMode::Dual), d.train_ha, d.train_ds, d.dev);
  TrainResult b = train(tiny_config(Task::Document, TrainMode::Dual), d.train_ha, d.train_ds, d.dev);
  CHECK(same_parameters(a.model, b.model));
  CHECK(a.model.threshold == b.model.threshold);
  CHECK(a.history.epochs.size() == 2);
  CHECK(a.history.ds_reads > 0);

  Dataset no_ds;
  no_ds.task = Task::Document;
  TrainResult ha = train(tiny_config(Task::Document, TrainMode::HAOnly), d.train_ha, no_ds, d.dev);
  CHECK(ha.history.ds_reads == 0);
  TrainResult ds = train(tiny_config(Task::Document, TrainMode::DSOnly), d.train_ha, d.train_ds, d.dev);
  CHECK(ds.history.ds_reads == 2 * d.train_ds.examples.size());
  CHECK_THROWS_AS(train(tiny_config(Task::Document, TrainMode::Single), d.train_ha, no_ds, d.dev), ConfigError);
}

TEST_CASE("threshold tuning") {
  const RelationFact pos{0, 1, 2, 0};
  const RelationFact neg{0, 1, 2, 1};
  const std::vector<ScoredFact> scored = {{pos, 0.9}, {neg, 0.1}};
  const std::vector<RelationFact> gold = {pos};
  const ThresholdChoice c = tune_threshold(scored, gold);
  CHECK(c.threshold > 0.1);
  CHECK(c.threshold <= 0.9);
  CHECK(c.result.f1 == 1.0);

  const std::vector<RelationFact> all = {pos, neg};
  CHECK(tune_threshold(scored, all).threshold <= 0.1);
  CHECK_THROWS_AS(tune_threshold(std::vector<ScoredFact>{}, gold), ContractError);
}

TEST_CASE("prediction rules") {
  std::vector<PairScores> scores(1);
  scores[0].p_ha = Eigen::Vector3d(0.2, 0.5, 0.3);
  const std::vector<RelationFact> sent = predict_facts(scores, Task::Sentence, 2, 0.5);
  REQUIRE(sent.size() == 1);
  CHECK(sent[0].relation == 1);
  scores[0].p_ha = Eigen::Vector3d(0.2, 0.1, 0.7);
  CHECK(predict_facts(scores, Task::Sentence, 2, 0.5).empty());
  scores[0].p_ha = Eigen::Vector3d(0.2, 0.5, 0.7);
  CHECK(predict_facts(scores, Task::Document, 3, 0.5).size() == 2);
  CHECK(scored_facts(scores, 3).size() == 3);
}

TEST_CASE("repeated steps on a fixed batch do not increase its loss") {
  const GeneratedData& d = tiny_data(Task::Document);
  TrainConfig tc = tiny_config(Task::Document, TrainMode::HAOnly);
  tc.optimizer = OptimizerKind::SGD;
  tc.learning_rate = 0.05;
  Model m = Model::init(tc, d.train_ha.vocab_size, d.train_ha.n_relations);
  const Batch batch = build_single_pool_batches(Source::HA, d.train_ha.examples.size(), 8, 4).front();
  StepState state;
  double previous = train_step(tc, m, state, d.train_ha, d.train_ds, batch);
  for (int epoch = 1; epoch < 5; ++epoch) {
    const double loss = train_step(tc, m, state, d.train_ha, d.train_ds, batch);
    CHECK(loss <= previous);
    previous = loss;
  }
}
