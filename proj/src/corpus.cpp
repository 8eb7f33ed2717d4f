// SPDX-License-Identifier: Apache-2.0
#include "dualre/corpus.hpp"

#include "dualre/errors.hpp"

#include <algorithm>

namespace dualre {

std::string_view to_string(Task task) { return task == Task::Sentence ? "sentence" : "document"; }

std::string_view to_string(Source source) { return source == Source::HA ? "HA" : "DS"; }

Task parse_task(std::string_view text) {
  if (text == "sentence") return Task::Sentence;
  if (text == "document") return Task::Document;
  throw ConfigError("unknown task '" + std::string(text) + "' (expected sentence|document)");
}

Source parse_source(std::string_view text) {
  if (text == "HA") return Source::HA;
  if (text == "DS") return Source::DS;
  throw ConfigError("unknown label source '" + std::string(text) + "' (expected HA|DS)");
}

void EntityMentions::validate(int length) const {
  if (mentions.empty()) {
    throw ContractError("entity " + std::to_string(entity) + ": empty mention list");
  }
  for (const Span& s : mentions) {
    if (s.start < 0 || s.start > s.end || s.end >= length) {
      throw ContractError("entity " + std::to_string(entity) + ": mention [" + std::to_string(s.start) + ", " +
                          std::to_string(s.end) + "] outside document of length " + std::to_string(length));
    }
  }
}

std::vector<Index> EntityMentions::word_indices() const {
  std::vector<Index> words;
  for (const Span& s : mentions) {
    for (int i = s.start; i <= s.end; ++i) words.push_back(i);
  }
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return words;
}

const EntityMentions& SynthDocument::entity(EntityId id) const {
  for (const EntityMentions& e : entities) {
    if (e.entity == id) return e;
  }
  throw ContractError("document " + std::to_string(this->id) + " does not mention entity " + std::to_string(id));
}

bool SynthDocument::mentions(EntityId id) const {
  return std::any_of(entities.begin(), entities.end(), [&](const EntityMentions& e) { return e.entity == id; });
}

const SynthDocument& Dataset::document(DocumentId id) const {
  auto it = std::lower_bound(documents.begin(), documents.end(), id,
                             [](const SynthDocument& d, DocumentId key) { return d.id < key; });
  if (it != documents.end() && it->id == id) return *it;
  for (const SynthDocument& d : documents) {
    if (d.id == id) return d;
  }
  throw ContractError("dataset has no document " + std::to_string(id));
}

}  // namespace dualre
