// SPDX-License-Identifier: Apache-2.0
#include "dualre/evaluator.hpp"

#include "dualre/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace dualre {

EvalResult make_result(std::size_t tp, std::size_t fp, std::size_t fn) {
  EvalResult r{tp, fp, fn, 0.0, 0.0, 0.0};
  if (tp + fp > 0) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (r.precision + r.recall > 0.0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

namespace {

std::set<RelationFact> positive_set(std::span<const RelationFact> facts, std::optional<RelationId> na) {
  std::set<RelationFact> out;
  for (const RelationFact& f : facts) {
    if (!na || f.relation != *na) out.insert(f);
  }
  return out;
}

}  // namespace

EvalResult micro_f1(std::span<const RelationFact> predictions, std::span<const RelationFact> gold,
                    std::optional<RelationId> na) {
  const std::set<RelationFact> pred = positive_set(predictions, na);
  const std::set<RelationFact> truth = positive_set(gold, na);
  std::size_t tp = 0;
  for (const RelationFact& f : pred) tp += truth.count(f);
  return make_result(tp, pred.size() - tp, truth.size() - tp);
}

std::vector<PrPoint> pr_curve(std::span<const ScoredFact> scored, std::span<const RelationFact> gold,
                              std::optional<RelationId> na) {
  for (const ScoredFact& s : scored) {
    if (!std::isfinite(s.score)) throw ContractError("pr_curve: non-finite score");
  }
  const std::set<RelationFact> truth = positive_set(gold, na);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (!na || scored[i].fact.relation != *na) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scored[a].score > scored[b].score; });

  std::vector<PrPoint> curve;
  curve.reserve(order.size());
  std::set<RelationFact> seen;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const ScoredFact& s = scored[order[k]];
    if (seen.insert(s.fact).second && truth.count(s.fact)) ++tp;
    const EvalResult r = make_result(tp, k + 1 - tp, truth.size() - tp);
    curve.push_back({k + 1, s.score, r.recall, r.precision});
  }
  return curve;
}

std::vector<GroupResult> f1_by_group(std::span<const RelationFact> predictions, std::span<const RelationFact> gold,
                                     std::span<const int> groups, int n_groups, std::optional<RelationId> na) {
  if (n_groups < 1) throw ContractError("f1_by_group: n_groups must be positive");
  auto group_of = [&](RelationId r) {
    if (r < 0 || static_cast<std::size_t>(r) >= groups.size()) {
      throw ContractError("f1_by_group: relation " + std::to_string(r) + " has no group");
    }
    const int g = groups[static_cast<std::size_t>(r)];
    if (g < 0 || g >= n_groups) throw ContractError("f1_by_group: group id out of range");
    return g;
  };

  std::vector<std::vector<RelationFact>> pred(static_cast<std::size_t>(n_groups));
  std::vector<std::vector<RelationFact>> truth(static_cast<std::size_t>(n_groups));
  for (const RelationFact& f : predictions) {
    if (!na || f.relation != *na) pred[static_cast<std::size_t>(group_of(f.relation))].push_back(f);
  }
  for (const RelationFact& f : gold) {
    if (!na || f.relation != *na) truth[static_cast<std::size_t>(group_of(f.relation))].push_back(f);
  }

  std::vector<GroupResult> out(static_cast<std::size_t>(n_groups));
  for (int g = 0; g < n_groups; ++g) {
    GroupResult& res = out[static_cast<std::size_t>(g)];
    res.group = g;
    res.n_relations = static_cast<std::size_t>(std::count(groups.begin(), groups.end(), g));
    res.result = micro_f1(pred[static_cast<std::size_t>(g)], truth[static_cast<std::size_t>(g)]);
    res.empty = pred[static_cast<std::size_t>(g)].empty() && truth[static_cast<std::size_t>(g)].empty();
  }
  return out;
}

std::vector<RelationFact> gold_facts(const Dataset& data) {
  const bool skip_na = data.task == Task::Sentence;
  const RelationId na = na_relation(data.n_relations);
  std::vector<RelationFact> out;
  for (const LabeledExample& ex : data.examples) {
    for (RelationId r : ex.labels.relations) {
      if (!skip_na || r != na) out.push_back({ex.document, ex.head, ex.tail, r});
    }
  }
  return out;
}

}  // namespace dualre
