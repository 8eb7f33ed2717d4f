// SPDX-License-Identifier: Apache-2.0
//
// Synthetic relation-extraction corpora with controllable labeling bias.
//
// Every document places 2-6 entity pairs ("slots"). A slot of relation r is
//   - with probability offkb_prob[r]: a pair outside the KB whose relation is
//     expressed in the text (human annotation sees it, distant supervision
//     does not);
//   - otherwise a KB pair of r, expressed with probability expression_prob[r],
//     followed with probability cooccur_extra_prob by one more unexpressed KB
//     pair of r.
// Expressed relations are realized by one of the relation's template token
// pairs between the head and tail mentions; unexpressed pairs get filler
// tokens.
// Entities of different slots never share a KB triple, so distant supervision
// labels exactly the slot pairs. The expected inflation of r is therefore
//
//   (1 - o_r)(1 + q) / ((1 - o_r) e_r + o_r)
//
// with o = offkb_prob, e = expression_prob, q = cooccur_extra_prob.
//
// Vocabulary layout: [0, n_filler) filler tokens, then one token per entity,
// then template_variants pairs of template tokens per relation.
#pragma once

#include "dualre/corpus.hpp"
#include "dualre/random.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dualre {

class KnowledgeBase {
public:
  KnowledgeBase() = default;
  KnowledgeBase(int n_entities, int n_relations, std::vector<Triple> triples);

  int n_entities() const { return n_entities_; }
  int n_relations() const { return n_relations_; }
  const std::vector<Triple>& triples() const { return triples_; }
  std::size_t size() const { return triples_.size(); }

  bool contains(const Triple& t) const;
  /// Relations r with (head, r, tail) in the KB, sorted.
  const std::vector<RelationId>& relations(EntityId head, EntityId tail) const;
  /// True when some triple links the two entities in either direction.
  bool connected(EntityId a, EntityId b) const;
  const std::vector<Triple>& of_relation(RelationId r) const { return by_relation_[static_cast<std::size_t>(r)]; }

private:
  static std::uint64_t key(EntityId a, EntityId b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
  }

  int n_entities_ = 0;
  int n_relations_ = 0;
  std::vector<Triple> triples_;
  std::vector<std::vector<Triple>> by_relation_;
  std::unordered_map<std::uint64_t, std::vector<RelationId>> pair_relations_;
};

struct GenConfig {
  Task task = Task::Document;
  int n_entities = 80;
  int n_relations = 8;
  int kb_triples = 480;
  int n_train_ha = 300;
  int n_train_ds = 3000;
  int n_dev = 200;
  int n_test = 300;
  int min_pairs = 2;
  int max_pairs = 6;
  /// Sampled cross-slot entity pairs per document (labeled negatives).
  int negative_pairs = 1;
  int n_filler = 20;
  /// Alternative template token pairs per relation.
  int template_variants = 8;
  /// Probability that a placed entity gets one more mention elsewhere in the document.
  double extra_mention_prob = 0.3;
  /// Per relation; empty means 1.
  std::vector<double> expression_prob;
  /// Per relation; empty means 0.
  std::vector<double> offkb_prob;
  double cooccur_extra_prob = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
  int vocab_size() const { return n_filler + n_entities + 2 * n_relations * template_variants; }
  double expression(RelationId r) const;
  double offkb(RelationId r) const;

  int entity_token(EntityId e) const { return n_filler + e; }
  int template_token(RelationId r, int variant, int k) const {
    return n_filler + n_entities + 2 * (r * template_variants + variant) + k;
  }
};

double expected_inflation(const GenConfig& cfg, RelationId r);

/// Chooses expression_prob / offkb_prob so that expected_inflation hits each target.
void set_target_inflations(GenConfig& cfg, std::span<const double> targets);

/// n values geometrically spaced over [lo, hi].
std::vector<double> log_spaced(int n, double lo, double hi);

/// kb_triples triples spread evenly over relations, pairs sampled uniformly
/// without replacement and without self-loops. Deterministic per seed.
KnowledgeBase generate_kb(const GenConfig& cfg);

/// `count` documents with ids first_id, first_id + 1, ...; `stream` selects an independent random stream.
std::vector<SynthDocument> generate_documents(const KnowledgeBase& kb, const GenConfig& cfg, int count,
                                              DocumentId first_id, std::uint64_t stream);

struct Corpus {
  std::vector<SynthDocument> train_ha;
  std::vector<SynthDocument> train_ds;
  std::vector<SynthDocument> dev;
  std::vector<SynthDocument> test;
};

/// Four disjoint document pools.
Corpus generate_corpus(const KnowledgeBase& kb, const GenConfig& cfg);

/// Human annotation: exactly the expressed relations of each labeled pair.
std::vector<LabeledExample> ha_label(const SynthDocument& doc, Task task, int n_relations);

/// Distant supervision: every KB relation of every co-occurring pair, expressed or not.
std::vector<LabeledExample> ds_label(const SynthDocument& doc, const KnowledgeBase& kb, Task task);

Dataset make_dataset(std::vector<SynthDocument> docs, Source source, const KnowledgeBase& kb, const GenConfig& cfg);

struct GeneratedData {
  KnowledgeBase kb;
  Dataset train_ha;
  Dataset train_ds;
  Dataset dev;
  Dataset test;
};

/// KB, corpus and labels; dev and test carry human-annotation labels.
GeneratedData generate_datasets(const GenConfig& cfg);

// Batching.

struct ExampleRef {
  Source pool = Source::HA;
  std::size_t index = 0;

  auto operator<=>(const ExampleRef&) const = default;
};

using Batch = std::vector<ExampleRef>;

enum class BatchMode {
  /// Every batch holds batch_size/2 HA and batch_size/2 DS examples.
  Mixed,
  /// Pure HA and pure DS batches alternate, starting with HA.
  Alternating,
};

/// One epoch: a pass over the larger pool; the smaller pool is recycled with
/// a fresh shuffle whenever it runs out.
std::vector<Batch> build_batches(std::size_t n_ha, std::size_t n_ds, int batch_size, std::uint64_t seed,
                                 BatchMode mode = BatchMode::Mixed);

/// One shuffled pass over a single pool; the last batch may be short.
std::vector<Batch> build_single_pool_batches(Source pool, std::size_t n, int batch_size, std::uint64_t seed);

// Serialization: line-delimited JSON; see README for the record layout.

void write_dataset(std::ostream& out, const Dataset& data);
void write_dataset(const std::string& path, const Dataset& data);
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::string& path);

/// Tab-separated head, relation, tail lines.
void write_kb(const std::string& path, const KnowledgeBase& kb);

}  // namespace dualre
