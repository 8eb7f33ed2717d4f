// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dualre/ndgrad.hpp"

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dualre {

using EntityId = int;
using RelationId = int;
using DocumentId = int;

enum class Task { Sentence, Document };
enum class Source { HA, DS };

std::string_view to_string(Task task);
std::string_view to_string(Source source);
Task parse_task(std::string_view text);
Source parse_source(std::string_view text);

/// Number of output classes: the sentence task appends NA as the last class.
inline Index output_size(Task task, int n_relations) {
  return task == Task::Sentence ? n_relations + 1 : n_relations;
}

/// NA class id in the sentence task.
inline RelationId na_relation(int n_relations) { return n_relations; }

/// Inclusive token range [start, end].
struct Span {
  int start = 0;
  int end = 0;

  auto operator<=>(const Span&) const = default;
};

struct EntityMentions {
  EntityId entity = 0;
  std::vector<Span> mentions;

  /// Throws ContractError unless the mention list is non-empty and every span
  /// lies inside a document of `length` tokens.
  void validate(int length) const;

  /// Sorted, de-duplicated token indices covered by the mentions.
  std::vector<Index> word_indices() const;

  bool operator==(const EntityMentions&) const = default;
};

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  auto operator<=>(const Triple&) const = default;
};

struct ExampleLabels {
  Source source = Source::HA;
  /// Sentence task: exactly one id (NA allowed). Document task: a possibly empty set.
  std::vector<RelationId> relations;

  bool is_ha() const { return source == Source::HA; }
  bool operator==(const ExampleLabels&) const = default;
};

struct LabeledExample {
  DocumentId document = 0;
  EntityId head = 0;
  EntityId tail = 0;
  ExampleLabels labels;

  bool operator==(const LabeledExample&) const = default;
};

struct SynthDocument {
  DocumentId id = 0;
  std::vector<int> tokens;
  std::vector<EntityMentions> entities;
  /// Ground truth: triples the text actually expresses. Sorted.
  std::vector<Triple> expressed;
  /// Ordered entity pairs considered for labeling (placed pairs and sampled negatives).
  std::vector<std::pair<EntityId, EntityId>> pairs;

  const EntityMentions& entity(EntityId id) const;
  bool mentions(EntityId id) const;

  bool operator==(const SynthDocument&) const = default;
};

struct Dataset {
  Task task = Task::Document;
  int n_relations = 0;
  int vocab_size = 0;
  std::vector<SynthDocument> documents;
  std::vector<LabeledExample> examples;

  /// Index of the document with the given id; throws ContractError if absent.
  const SynthDocument& document(DocumentId id) const;

  bool operator==(const Dataset&) const = default;
};

}  // namespace dualre
