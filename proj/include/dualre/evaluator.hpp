// SPDX-License-Identifier: Apache-2.0
//
// Micro-averaged precision/recall/F1 over relation facts, precision-recall
// curves, and F1 restricted to inflation groups.
#pragma once

#include "dualre/corpus.hpp"

#include <compare>
#include <optional>
#include <span>
#include <vector>

namespace dualre {

/// One predicted or gold relation instance (doc, h, t, r).
struct RelationFact {
  DocumentId document = 0;
  EntityId head = 0;
  EntityId tail = 0;
  RelationId relation = 0;

  auto operator<=>(const RelationFact&) const = default;
};

struct EvalResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision, recall and F1 from counts; every zero denominator yields 0.
EvalResult make_result(std::size_t tp, std::size_t fp, std::size_t fn);

/// Set semantics: duplicates collapse. Facts with relation == `na` never count.
EvalResult micro_f1(std::span<const RelationFact> predictions, std::span<const RelationFact> gold,
                    std::optional<RelationId> na = std::nullopt);

struct ScoredFact {
  RelationFact fact;
  double score = 0.0;
};

struct PrPoint {
  std::size_t rank = 0;  // 1-based prefix length
  double score = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

/// One point per prefix of the predictions sorted by descending score (stable).
/// A repeated fact counts as a false positive after its first occurrence.
std::vector<PrPoint> pr_curve(std::span<const ScoredFact> scored, std::span<const RelationFact> gold,
                              std::optional<RelationId> na = std::nullopt);

struct GroupResult {
  int group = 0;
  std::size_t n_relations = 0;
  EvalResult result;
  /// No gold and no predictions fall in the group.
  bool empty = true;
};

/// groups[r] is the group of relation r; NA (if given) is skipped before lookup.
std::vector<GroupResult> f1_by_group(std::span<const RelationFact> predictions, std::span<const RelationFact> gold,
                                     std::span<const int> groups, int n_groups,
                                     std::optional<RelationId> na = std::nullopt);

/// Gold facts of a dataset: every non-NA label of every example.
std::vector<RelationFact> gold_facts(const Dataset& data);

}  // namespace dualre
