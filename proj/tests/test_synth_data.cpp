// SPDX-License-Identifier: Apache-2.0
#include "dualre/bias_stats.hpp"
#include "dualre/errors.hpp"
#include "dualre/synth_data.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

using namespace dualre;

namespace {

GenConfig small_config(Task task = Task::Document) {
  GenConfig cfg;
  cfg.task = task;
  cfg.n_entities = 30;
  cfg.n_relations = 4;
  cfg.kb_triples = 80;
  cfg.n_train_ha = 40;
  cfg.n_train_ds = 60;
  cfg.n_dev = 20;
  cfg.n_test = 20;
  cfg.template_variants = 2;
  set_target_inflations(cfg, log_spaced(4, 0.5, 8.0));
  return cfg;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("knowledge base generation") {
  GenConfig cfg;
  cfg.n_entities = 2;
  cfg.n_relations = 1;
  cfg.kb_triples = 2;
  const KnowledgeBase kb = generate_kb(cfg);
  CHECK(kb.size() == 2);
  CHECK(kb.contains({0, 0, 1}));
  CHECK(kb.contains({1, 0, 0}));
  CHECK(kb.connected(1, 0));
  CHECK(kb.relations(0, 1) == std::vector<RelationId>{0});
  CHECK(kb.relations(0, 0).empty());
  cfg.kb_triples = 3;
  CHECK_THROWS_AS(generate_kb(cfg), ConfigError);

  const GenConfig big = small_config();
  const KnowledgeBase a = generate_kb(big);
  CHECK(a.triples() == generate_kb(big).triples());
  CHECK(a.size() == 80);
  for (RelationId r = 0; r < 4; ++r) CHECK(a.of_relation(r).size() == 20);
  for (const Triple& t : a.triples()) CHECK(t.head != t.tail);
}

TEST_CASE("knowledge base rejects bad triples") {
  CHECK_THROWS_AS(KnowledgeBase(3, 1, {{0, 0, 1}, {0, 0, 1}}), ContractError);
  CHECK_THROWS_AS(KnowledgeBase(3, 1, {{0, 1, 1}}), ContractError);
}

TEST_CASE("log spacing and target inflations") {
  const std::vector<double> xs = log_spaced(5, 0.5, 8.0);
  CHECK(xs.front() == doctest::Approx(0.5));
  CHECK(xs.back() == doctest::Approx(8.0));
  CHECK(xs[2] == doctest::Approx(2.0));
  GenConfig cfg = small_config();
  cfg.cooccur_extra_prob = 0.2;
  const std::vector<double> targets = {0.3, 1.0, 2.5, 40.0};
  set_target_inflations(cfg, targets);
  for (RelationId r = 0; r < 4; ++r) CHECK(expected_inflation(cfg, r) == doctest::Approx(targets[r]));
  CHECK_THROWS_AS(set_target_inflations(cfg, std::vector<double>{1.0}), ConfigError);
}

TEST_CASE("generator configuration validation") {
  GenConfig cfg = small_config();
  cfg.min_pairs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.extra_mention_prob = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.template_variants = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("documents are well formed and deterministic") {
  const GenConfig cfg = small_config();
  const GeneratedData a = generate_datasets(cfg);
  const GeneratedData b = generate_datasets(cfg);
  CHECK(a.train_ha == b.train_ha);
  CHECK(a.test == b.test);

  GenConfig other = cfg;
  other.seed = 2;
  CHECK_FALSE(generate_datasets(other).train_ds == a.train_ds);

  std::set<DocumentId> ids;
  for (const Dataset* d : {&a.train_ha, &a.train_ds, &a.dev, &a.test}) {
    for (const SynthDocument& doc : d->documents) {
      CHECK(ids.insert(doc.id).second);
      for (int tok : doc.tokens) CHECK((tok >= 0 && tok < cfg.vocab_size()));
      for (const EntityMentions& e : doc.entities) CHECK_NOTHROW(e.validate(static_cast<int>(doc.tokens.size())));
      for (const auto& [h, t] : doc.pairs) {
        CHECK(doc.mentions(h));
        CHECK(doc.mentions(t));
      }
    }
  }
}

TEST_CASE("labeling functions") {
  const GenConfig cfg = small_config();
  const KnowledgeBase kb = generate_kb(cfg);
  const std::vector<SynthDocument> docs = generate_documents(kb, cfg, 50, 0, 9);
  for (const SynthDocument& doc : docs) {
    for (const LabeledExample& ex : ha_label(doc, Task::Document, cfg.n_relations)) {
      CHECK(ex.labels.source == Source::HA);
      for (RelationId r : ex.labels.relations)
        CHECK(std::binary_search(doc.expressed.begin(), doc.expressed.end(), Triple{ex.head, r, ex.tail}));
    }
    for (const LabeledExample& ex : ds_label(doc, kb, Task::Document)) {
      CHECK(ex.labels.relations == kb.relations(ex.head, ex.tail));
    }
    for (const LabeledExample& ex : ha_label(doc, Task::Sentence, cfg.n_relations)) {
      CHECK(ex.labels.relations.size() == 1);
    }
  }
}

TEST_CASE("measured inflation tracks the configured targets") {
  GenConfig cfg = small_config();
  cfg.template_variants = 1;
  cfg.n_train_ha = 3000;
  cfg.n_train_ds = 3000;
  set_target_inflations(cfg, std::vector<double>{0.5, 1.0, 2.0, 4.0});
  const GeneratedData data = generate_datasets(cfg);
  const InflationReport rep = compute_inflation(data.train_ha, data.train_ds);
  CHECK(rep.inflation[0] == doctest::Approx(0.5).epsilon(0.15));
  CHECK(rep.inflation[1] == doctest::Approx(1.0).epsilon(0.15));
  CHECK(rep.inflation[2] == doctest::Approx(2.0).epsilon(0.15));
  CHECK(rep.inflation[3] == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("mixed batches split evenly between pools") {
  const std::vector<Batch> batches = build_batches(10, 7, 4, 3);
  REQUIRE(batches.size() == 5);
  std::set<std::size_t> seen_ha;
  for (const Batch& b : batches) {
    CHECK(b.size() == 4);
    CHECK(std::count_if(b.begin(), b.end(), [](const ExampleRef& e) { return e.pool == Source::HA; }) == 2);
    for (const ExampleRef& e : b) {
      if (e.pool == Source::HA) seen_ha.insert(e.index);
    }
  }
  CHECK(seen_ha.size() == 10);
  CHECK(build_batches(10, 7, 4, 3) == batches);
  CHECK_THROWS_AS(build_batches(10, 7, 5, 3), ConfigError);
}

TEST_CASE("alternating batches switch pools") {
  const std::vector<Batch> batches = build_batches(8, 8, 4, 1, BatchMode::Alternating);
  REQUIRE(batches.size() >= 2);
  for (std::size_t i = 0; i < batches.size(); ++i) {
    const Source want = i % 2 == 0 ? Source::HA : Source::DS;
    for (const ExampleRef& e : batches[i]) CHECK(e.pool == want);
  }
}

TEST_CASE("single-pool batches cover the pool once") {
  const std::vector<Batch> batches = build_single_pool_batches(Source::DS, 10, 4, 2);
  REQUIRE(batches.size() == 3);
  CHECK(batches.back().size() == 2);
  std::set<std::size_t> seen;
  for (const Batch& b : batches)
    for (const ExampleRef& e : b) seen.insert(e.index);
  CHECK(seen.size() == 10);
}

TEST_CASE("dataset serialization round trip") {
  for (Task task : {Task::Document, Task::Sentence}) {
    const GeneratedData data = generate_datasets(small_config(task));
    std::ostringstream out;
    write_dataset(out, data.train_ds);
    std::istringstream in(out.str());
    CHECK(read_dataset(in) == data.train_ds);
  }
}

TEST_CASE("truncated dataset reports the failing line") {
  const GeneratedData data = generate_datasets(small_config());
  std::ostringstream out;
  write_dataset(out, data.dev);
  const std::vector<std::string> lines = lines_of(out.str());
  REQUIRE(lines.size() > 5);

  std::string dropped;
  for (std::size_t i = 0; i + 3 < lines.size(); ++i) dropped += lines[i] + "\n";
  std::istringstream in(dropped);
  try {
    read_dataset(in);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == lines.size() - 2);
  }

  std::string cut;
  for (std::size_t i = 0; i < 4; ++i) cut += lines[i] + "\n";
  cut += lines[4].substr(0, lines[4].size() / 2);
  std::istringstream half(cut);
  try {
    read_dataset(half);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
    CHECK(std::string(e.what()).rfind("line 5:", 0) == 0);
  }
}
