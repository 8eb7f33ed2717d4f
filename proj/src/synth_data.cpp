// SPDX-License-Identifier: Apache-2.0
#include "dualre/synth_data.hpp"

#include "dualre/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace dualre {

KnowledgeBase::KnowledgeBase(int n_entities, int n_relations, std::vector<Triple> triples)
    : n_entities_(n_entities), n_relations_(n_relations), triples_(std::move(triples)) {
  std::sort(triples_.begin(), triples_.end());
  if (std::adjacent_find(triples_.begin(), triples_.end()) != triples_.end()) {
    throw ContractError("knowledge base: duplicate triple");
  }
  by_relation_.resize(static_cast<std::size_t>(n_relations));
  for (const Triple& t : triples_) {
    if (t.relation < 0 || t.relation >= n_relations || t.head < 0 || t.head >= n_entities || t.tail < 0 ||
        t.tail >= n_entities) {
      throw ContractError("knowledge base: triple out of range");
    }
    by_relation_[static_cast<std::size_t>(t.relation)].push_back(t);
    pair_relations_[key(t.head, t.tail)].push_back(t.relation);
  }
}

bool KnowledgeBase::contains(const Triple& t) const {
  return std::binary_search(triples_.begin(), triples_.end(), t);
}

const std::vector<RelationId>& KnowledgeBase::relations(EntityId head, EntityId tail) const {
  static const std::vector<RelationId> none;
  auto it = pair_relations_.find(key(head, tail));
  return it == pair_relations_.end() ? none : it->second;
}

bool KnowledgeBase::connected(EntityId a, EntityId b) const {
  return pair_relations_.count(key(a, b)) > 0 || pair_relations_.count(key(b, a)) > 0;
}

void GenConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(n_entities, "n_entities");
  positive(n_relations, "n_relations");
  positive(kb_triples, "kb_triples");
  positive(n_train_ha, "n_train_ha");
  positive(n_train_ds, "n_train_ds");
  positive(n_dev, "n_dev");
  positive(n_test, "n_test");
  positive(n_filler, "n_filler");
  positive(template_variants, "template_variants");
  if (min_pairs < 1 || max_pairs < min_pairs) throw ConfigError("need 1 <= min_pairs <= max_pairs");
  if (negative_pairs < 0) throw ConfigError("negative_pairs must be non-negative");
  auto probability = [](double p, const std::string& name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(name + " must lie in [0, 1]");
  };
  probability(extra_mention_prob, "extra_mention_prob");
  probability(cooccur_extra_prob, "cooccur_extra_prob");
  for (double p : expression_prob) probability(p, "expression_prob");
  for (double p : offkb_prob) probability(p, "offkb_prob");
  if (!expression_prob.empty() && expression_prob.size() != static_cast<std::size_t>(n_relations)) {
    throw ConfigError("expression_prob needs one value per relation");
  }
  if (!offkb_prob.empty() && offkb_prob.size() != static_cast<std::size_t>(n_relations)) {
    throw ConfigError("offkb_prob needs one value per relation");
  }
}

double GenConfig::expression(RelationId r) const {
  return expression_prob.empty() ? 1.0 : expression_prob[static_cast<std::size_t>(r)];
}

double GenConfig::offkb(RelationId r) const {
  return offkb_prob.empty() ? 0.0 : offkb_prob[static_cast<std::size_t>(r)];
}

double expected_inflation(const GenConfig& cfg, RelationId r) {
  const double o = cfg.offkb(r);
  const double e = cfg.expression(r);
  const double ha = (1.0 - o) * e + o;
  const double ds = (1.0 - o) * (1.0 + cfg.cooccur_extra_prob);
  return ha > 0.0 ? ds / ha : std::numeric_limits<double>::infinity();
}

void set_target_inflations(GenConfig& cfg, std::span<const double> targets) {
  if (targets.size() != static_cast<std::size_t>(cfg.n_relations)) {
    throw ConfigError("set_target_inflations: need one target per relation");
  }
  const double base = 1.0 + cfg.cooccur_extra_prob;
  cfg.expression_prob.assign(targets.size(), 1.0);
  cfg.offkb_prob.assign(targets.size(), 0.0);
  for (std::size_t r = 0; r < targets.size(); ++r) {
    const double target = targets[r];
    if (!(target > 0.0) || !std::isfinite(target)) throw ConfigError("target inflations must be positive and finite");
    if (target >= base) {
      cfg.expression_prob[r] = base / target;
    } else {
      cfg.offkb_prob[r] = 1.0 - target / base;
    }
  }
}

std::vector<double> log_spaced(int n, double lo, double hi) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw ConfigError("log_spaced: need n >= 1 and 0 < lo <= hi");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    out.push_back(std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
  }
  out.front() = lo;
  if (n > 1) out.back() = hi;
  return out;
}

KnowledgeBase generate_kb(const GenConfig& cfg) {
  cfg.validate();
  const long long pairs = static_cast<long long>(cfg.n_entities) * (cfg.n_entities - 1);
  if (static_cast<long long>(cfg.kb_triples) > pairs * cfg.n_relations) {
    throw ConfigError("kb_triples exceeds the " + std::to_string(pairs * cfg.n_relations) +
                      " possible triples without self-loops");
  }
  Rng rng(mix_seed(cfg.seed, 0x6b62));
  std::vector<Triple> triples;
  const int base = cfg.kb_triples / cfg.n_relations;
  const int extra = cfg.kb_triples % cfg.n_relations;
  for (int r = 0; r < cfg.n_relations; ++r) {
    const long long count = base + (r < extra ? 1 : 0);
    if (count > pairs) throw ConfigError("kb_triples: too many triples for relation " + std::to_string(r));
    if (count * 2 > pairs) {
      std::vector<std::pair<EntityId, EntityId>> all;
      for (EntityId h = 0; h < cfg.n_entities; ++h) {
        for (EntityId t = 0; t < cfg.n_entities; ++t) {
          if (h != t) all.emplace_back(h, t);
        }
      }
      std::shuffle(all.begin(), all.end(), rng);
      for (long long k = 0; k < count; ++k) triples.push_back({all[k].first, r, all[k].second});
    } else {
      std::set<std::pair<EntityId, EntityId>> chosen;
      std::uniform_int_distribution<EntityId> pick(0, cfg.n_entities - 1);
      while (static_cast<long long>(chosen.size()) < count) {
        const EntityId h = pick(rng);
        const EntityId t = pick(rng);
        if (h != t && chosen.emplace(h, t).second) triples.push_back({h, r, t});
      }
    }
  }
  return KnowledgeBase(cfg.n_entities, cfg.n_relations, std::move(triples));
}

namespace {

struct Slot {
  EntityId head;
  EntityId tail;
  RelationId relation;
  bool expressed;
};

struct Token {
  int id;
  EntityId entity;  // -1 for non-mention tokens
};

class DocumentBuilder {
public:
  DocumentBuilder(const KnowledgeBase& kb, const GenConfig& cfg, Rng& rng) : kb_(kb), cfg_(cfg), rng_(rng) {}

  SynthDocument build(DocumentId id) {
    placed_.clear();
    slots_.clear();
    std::uniform_int_distribution<int> count(cfg_.min_pairs, cfg_.max_pairs);
    std::uniform_int_distribution<RelationId> relation(0, cfg_.n_relations - 1);
    std::bernoulli_distribution extra(cfg_.cooccur_extra_prob);
    const int k = count(rng_);
    for (int s = 0; s < k; ++s) {
      const RelationId r = relation(rng_);
      if (std::bernoulli_distribution(cfg_.offkb(r))(rng_)) {
        place_offkb(r);
        continue;
      }
      const bool expressed = std::bernoulli_distribution(cfg_.expression(r))(rng_);
      place_kb(r, expressed);
      if (extra(rng_)) place_kb(r, false);
    }
    return assemble(id);
  }

private:
  bool free_of_placed(EntityId e) const {
    if (placed_.count(e)) return false;
    return std::none_of(placed_.begin(), placed_.end(), [&](EntityId p) { return kb_.connected(e, p); });
  }

  void place_kb(RelationId r, bool expressed) {
    const std::vector<Triple>& pool = kb_.of_relation(r);
    if (pool.empty()) return;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (int attempt = 0; attempt < 64; ++attempt) {
      const Triple& t = pool[pick(rng_)];
      if (!free_of_placed(t.head) || !free_of_placed(t.tail)) continue;
      if (kb_.relations(t.head, t.tail).size() != 1 || !kb_.relations(t.tail, t.head).empty()) continue;
      add_slot({t.head, t.tail, r, expressed});
      return;
    }
  }

  void place_offkb(RelationId r) {
    std::uniform_int_distribution<EntityId> pick(0, cfg_.n_entities - 1);
    for (int attempt = 0; attempt < 64; ++attempt) {
      const EntityId h = pick(rng_);
      const EntityId t = pick(rng_);
      if (h == t || kb_.connected(h, t) || !free_of_placed(h) || !free_of_placed(t)) continue;
      add_slot({h, t, r, true});
      return;
    }
  }

  void add_slot(const Slot& s) {
    slots_.push_back(s);
    placed_.insert(s.head);
    placed_.insert(s.tail);
  }

  int filler() { return std::uniform_int_distribution<int>(0, cfg_.n_filler - 1)(rng_); }

  SynthDocument assemble(DocumentId id) {
    std::vector<std::vector<Token>> segments;
    for (const Slot& s : slots_) {
      std::vector<Token> seg{{cfg_.entity_token(s.head), s.head}};
      if (s.expressed) {
        const int v = std::uniform_int_distribution<int>(0, cfg_.template_variants - 1)(rng_);
        seg.push_back({cfg_.template_token(s.relation, v, 0), -1});
        seg.push_back({cfg_.template_token(s.relation, v, 1), -1});
      } else {
        seg.push_back({filler(), -1});
        seg.push_back({filler(), -1});
      }
      seg.push_back({cfg_.entity_token(s.tail), s.tail});
      segments.push_back(std::move(seg));
    }
    std::bernoulli_distribution extra_mention(cfg_.extra_mention_prob);
    for (EntityId e : placed_) {
      if (extra_mention(rng_)) segments.push_back({{cfg_.entity_token(e), e}});
    }
    std::shuffle(segments.begin(), segments.end(), rng_);

    SynthDocument doc;
    doc.id = id;
    std::map<EntityId, std::vector<Span>> mentions;
    std::uniform_int_distribution<int> gap(1, 2);
    doc.tokens.push_back(filler());
    for (const auto& seg : segments) {
      for (const Token& tok : seg) {
        if (tok.entity >= 0) {
          const int pos = static_cast<int>(doc.tokens.size());
          mentions[tok.entity].push_back({pos, pos});
        }
        doc.tokens.push_back(tok.id);
      }
      const int g = gap(rng_);
      for (int i = 0; i < g; ++i) doc.tokens.push_back(filler());
    }
    for (auto& [entity, spans] : mentions) doc.entities.push_back({entity, std::move(spans)});

    std::set<std::pair<EntityId, EntityId>> seen;
    for (const Slot& s : slots_) {
      if (s.expressed) doc.expressed.push_back({s.head, s.relation, s.tail});
      if (seen.emplace(s.head, s.tail).second) doc.pairs.emplace_back(s.head, s.tail);
    }
    std::sort(doc.expressed.begin(), doc.expressed.end());

    const std::vector<EntityId> entities(placed_.begin(), placed_.end());
    const long long possible = static_cast<long long>(entities.size()) * (static_cast<long long>(entities.size()) - 1);
    int negatives = 0;
    if (entities.size() >= 2) {
      std::uniform_int_distribution<std::size_t> pick(0, entities.size() - 1);
      for (int attempt = 0; negatives < cfg_.negative_pairs && attempt < 32 * (cfg_.negative_pairs + 1) &&
                            static_cast<long long>(seen.size()) < possible;
           ++attempt) {
        const EntityId a = entities[pick(rng_)];
        const EntityId b = entities[pick(rng_)];
        if (a == b || !seen.emplace(a, b).second) continue;
        doc.pairs.emplace_back(a, b);
        ++negatives;
      }
    }
    return doc;
  }

  const KnowledgeBase& kb_;
  const GenConfig& cfg_;
  Rng& rng_;
  std::set<EntityId> placed_;
  std::vector<Slot> slots_;
};

}  // namespace

std::vector<SynthDocument> generate_documents(const KnowledgeBase& kb, const GenConfig& cfg, int count,
                                              DocumentId first_id, std::uint64_t stream) {
  cfg.validate();
  if (kb.size() == 0) throw ContractError("generate_corpus: empty knowledge base");
  Rng rng(mix_seed(cfg.seed, stream));
  DocumentBuilder builder(kb, cfg, rng);
  std::vector<SynthDocument> docs;
  docs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) docs.push_back(builder.build(first_id + i));
  return docs;
}

Corpus generate_corpus(const KnowledgeBase& kb, const GenConfig& cfg) {
  Corpus c;
  DocumentId next = 0;
  c.train_ha = generate_documents(kb, cfg, cfg.n_train_ha, next, 1);
  next += cfg.n_train_ha;
  c.train_ds = generate_documents(kb, cfg, cfg.n_train_ds, next, 2);
  next += cfg.n_train_ds;
  c.dev = generate_documents(kb, cfg, cfg.n_dev, next, 3);
  next += cfg.n_dev;
  c.test = generate_documents(kb, cfg, cfg.n_test, next, 4);
  return c;
}

namespace {

void emit(std::vector<LabeledExample>& out, const SynthDocument& doc, EntityId h, EntityId t,
          std::vector<RelationId> relations, Source source, Task task, RelationId na) {
  if (task == Task::Document) {
    out.push_back({doc.id, h, t, {source, std::move(relations)}});
    return;
  }
  if (relations.empty()) relations.push_back(na);
  for (RelationId r : relations) out.push_back({doc.id, h, t, {source, {r}}});
}

}  // namespace

std::vector<LabeledExample> ha_label(const SynthDocument& doc, Task task, int n_relations) {
  std::vector<std::pair<EntityId, EntityId>> pairs = doc.pairs;
  for (const Triple& t : doc.expressed) {
    if (std::find(pairs.begin(), pairs.end(), std::make_pair(t.head, t.tail)) == pairs.end()) {
      pairs.emplace_back(t.head, t.tail);
    }
  }
  std::vector<LabeledExample> out;
  for (const auto& [h, t] : pairs) {
    std::vector<RelationId> rels;
    for (const Triple& tr : doc.expressed) {
      if (tr.head == h && tr.tail == t) rels.push_back(tr.relation);
    }
    emit(out, doc, h, t, std::move(rels), Source::HA, task, na_relation(n_relations));
  }
  return out;
}

std::vector<LabeledExample> ds_label(const SynthDocument& doc, const KnowledgeBase& kb, Task task) {
  std::vector<std::pair<EntityId, EntityId>> pairs = doc.pairs;
  for (const EntityMentions& a : doc.entities) {
    for (const EntityMentions& b : doc.entities) {
      if (a.entity == b.entity || kb.relations(a.entity, b.entity).empty()) continue;
      const auto p = std::make_pair(a.entity, b.entity);
      if (std::find(pairs.begin(), pairs.end(), p) == pairs.end()) pairs.push_back(p);
    }
  }
  std::vector<LabeledExample> out;
  for (const auto& [h, t] : pairs) {
    emit(out, doc, h, t, kb.relations(h, t), Source::DS, task, na_relation(kb.n_relations()));
  }
  return out;
}

Dataset make_dataset(std::vector<SynthDocument> docs, Source source, const KnowledgeBase& kb, const GenConfig& cfg) {
  Dataset data;
  data.task = cfg.task;
  data.n_relations = cfg.n_relations;
  data.vocab_size = cfg.vocab_size();
  for (const SynthDocument& doc : docs) {
    std::vector<LabeledExample> ex =
        source == Source::HA ? ha_label(doc, cfg.task, cfg.n_relations) : ds_label(doc, kb, cfg.task);
    data.examples.insert(data.examples.end(), ex.begin(), ex.end());
  }
  data.documents = std::move(docs);
  return data;
}

GeneratedData generate_datasets(const GenConfig& cfg) {
  GeneratedData out;
  out.kb = generate_kb(cfg);
  Corpus c = generate_corpus(out.kb, cfg);
  out.train_ha = make_dataset(std::move(c.train_ha), Source::HA, out.kb, cfg);
  out.train_ds = make_dataset(std::move(c.train_ds), Source::DS, out.kb, cfg);
  out.dev = make_dataset(std::move(c.dev), Source::HA, out.kb, cfg);
  out.test = make_dataset(std::move(c.test), Source::HA, out.kb, cfg);
  return out;
}

namespace {

class PoolStream {
public:
  PoolStream(Source pool, std::size_t n, Rng& rng) : pool_(pool), order_(n), rng_(rng) { reshuffle(); }

  ExampleRef next() {
    if (pos_ == order_.size()) reshuffle();
    return {pool_, order_[pos_++]};
  }

private:
  void reshuffle() {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
  }

  Source pool_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  Rng& rng_;
};

}  // namespace

std::vector<Batch> build_batches(std::size_t n_ha, std::size_t n_ds, int batch_size, std::uint64_t seed,
                                 BatchMode mode) {
  if (n_ha == 0 || n_ds == 0) throw ConfigError("build_batches: both pools must be non-empty");
  if (batch_size < 1) throw ConfigError("build_batches: batch_size must be positive");
  Rng rng(mix_seed(seed, 0xba7c));
  PoolStream ha(Source::HA, n_ha, rng);
  PoolStream ds(Source::DS, n_ds, rng);
  const std::size_t larger = std::max(n_ha, n_ds);
  std::vector<Batch> batches;

  if (mode == BatchMode::Mixed) {
    if (batch_size % 2 != 0) throw ConfigError("build_batches: batch_size must be even in mixed mode");
    const std::size_t half = static_cast<std::size_t>(batch_size / 2);
    const std::size_t count = (larger + half - 1) / half;
    for (std::size_t b = 0; b < count; ++b) {
      Batch batch;
      for (std::size_t i = 0; i < half; ++i) batch.push_back(ha.next());
      for (std::size_t i = 0; i < half; ++i) batch.push_back(ds.next());
      batches.push_back(std::move(batch));
    }
    return batches;
  }

  const std::size_t size = static_cast<std::size_t>(batch_size);
  const std::size_t rounds = (larger + size - 1) / size;
  for (std::size_t b = 0; b < rounds; ++b) {
    for (PoolStream* stream : {&ha, &ds}) {
      Batch batch;
      for (std::size_t i = 0; i < size; ++i) batch.push_back(stream->next());
      batches.push_back(std::move(batch));
    }
  }
  return batches;
}

std::vector<Batch> build_single_pool_batches(Source pool, std::size_t n, int batch_size, std::uint64_t seed) {
  if (n == 0) throw ConfigError("build_batches: pool must be non-empty");
  if (batch_size < 1) throw ConfigError("build_batches: batch_size must be positive");
  Rng rng(mix_seed(seed, 0xba7c));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
    Batch batch;
    for (std::size_t i = start; i < std::min(n, start + static_cast<std::size_t>(batch_size)); ++i) {
      batch.push_back({pool, order[i]});
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

// Serialization.

namespace {

using Json = nlohmann::ordered_json;

Json document_record(const SynthDocument& doc) {
  Json entities = Json::array();
  for (const EntityMentions& e : doc.entities) {
    Json spans = Json::array();
    for (const Span& s : e.mentions) spans.push_back({s.start, s.end});
    entities.push_back({{"entity", e.entity}, {"mentions", spans}});
  }
  Json expressed = Json::array();
  for (const Triple& t : doc.expressed) expressed.push_back({t.head, t.relation, t.tail});
  Json pairs = Json::array();
  for (const auto& [h, t] : doc.pairs) pairs.push_back({h, t});
  return {{"kind", "document"}, {"id", doc.id},       {"tokens", doc.tokens}, {"entities", entities},
          {"expressed", expressed}, {"pairs", pairs}};
}

Json example_record(const LabeledExample& ex) {
  return {{"kind", "example"},
          {"document", ex.document},
          {"head", ex.head},
          {"tail", ex.tail},
          {"source", std::string(to_string(ex.labels.source))},
          {"relations", ex.labels.relations}};
}

SynthDocument parse_document(const Json& j) {
  SynthDocument doc;
  doc.id = j.at("id").get<int>();
  doc.tokens = j.at("tokens").get<std::vector<int>>();
  for (const Json& e : j.at("entities")) {
    EntityMentions m;
    m.entity = e.at("entity").get<int>();
    for (const Json& s : e.at("mentions")) m.mentions.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
    doc.entities.push_back(std::move(m));
  }
  for (const Json& t : j.at("expressed")) doc.expressed.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
  for (const Json& p : j.at("pairs")) doc.pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  return doc;
}

LabeledExample parse_example(const Json& j) {
  LabeledExample ex;
  ex.document = j.at("document").get<int>();
  ex.head = j.at("head").get<int>();
  ex.tail = j.at("tail").get<int>();
  ex.labels.source = parse_source(j.at("source").get<std::string>());
  ex.labels.relations = j.at("relations").get<std::vector<int>>();
  return ex;
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& data) {
  Json header = {{"kind", "header"},
                 {"format", "dualre-dataset"},
                 {"version", 1},
                 {"task", std::string(to_string(data.task))},
                 {"n_relations", data.n_relations},
                 {"vocab_size", data.vocab_size},
                 {"documents", data.documents.size()},
                 {"examples", data.examples.size()}};
  out << header.dump() << '\n';
  for (const SynthDocument& doc : data.documents) out << document_record(doc).dump() << '\n';
  for (const LabeledExample& ex : data.examples) out << example_record(ex).dump() << '\n';
  if (!out) throw IoError("dataset: write failed");
}

void write_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_dataset(out, data);
}

Dataset read_dataset(std::istream& in) {
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  std::size_t want_docs = 0;
  std::size_t want_examples = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw ParseError(line_no, "empty line");
    Json j;
    try {
      j = Json::parse(line);
      const std::string kind = j.at("kind").get<std::string>();
      if (!have_header) {
        if (kind != "header" || j.at("format").get<std::string>() != "dualre-dataset") {
          throw ParseError(line_no, "expected dataset header");
        }
        if (j.at("version").get<int>() != 1) throw ParseError(line_no, "unsupported dataset version");
        data.task = parse_task(j.at("task").get<std::string>());
        data.n_relations = j.at("n_relations").get<int>();
        data.vocab_size = j.at("vocab_size").get<int>();
        want_docs = j.at("documents").get<std::size_t>();
        want_examples = j.at("examples").get<std::size_t>();
        have_header = true;
      } else if (kind == "document") {
        if (!data.examples.empty()) throw ParseError(line_no, "document record after example records");
        data.documents.push_back(parse_document(j));
      } else if (kind == "example") {
        data.examples.push_back(parse_example(j));
      } else {
        throw ParseError(line_no, "unknown record kind '" + kind + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, std::string("malformed record: ") + e.what());
    }
  }
  if (!have_header) throw ParseError(line_no + 1, "missing dataset header");
  if (data.documents.size() != want_docs || data.examples.size() != want_examples) {
    throw ParseError(line_no + 1, "truncated dataset: expected " + std::to_string(want_docs) + " documents and " +
                                      std::to_string(want_examples) + " examples");
  }
  return data;
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path);
  return read_dataset(in);
}

void write_kb(const std::string& path, const KnowledgeBase& kb) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const Triple& t : kb.triples()) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
}

}  // namespace dualre
