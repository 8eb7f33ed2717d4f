// SPDX-License-Identifier: Apache-2.0
//
// Plain CSV tables with deterministic number formatting.
#pragma once

#include "dualre/bias_stats.hpp"
#include "dualre/evaluator.hpp"
#include "dualre/trainer.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dualre {

/// %.10g; "inf" / "-inf" / "nan" for non-finite values.
std::string format_number(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  void write(std::ostream& out) const;
  void write(const std::string& path) const;
};

CsvTable history_table(const TrainHistory& history);

struct MetricsRow {
  std::string mode;
  std::uint64_t seed = 0;
  std::string split;
  EvalResult result;
  std::optional<double> threshold;
};

CsvTable metrics_table(const std::vector<MetricsRow>& rows);
CsvTable pr_table(const std::vector<PrPoint>& curve);

/// `ranges[g]` is the inflation range label of group g.
CsvTable groups_table(const std::vector<GroupResult>& groups, const std::vector<std::string>& ranges);

CsvTable bias_table(const InflationReport& report, const std::vector<int>& groups);
CsvTable fit_table(const FamilyRanking& ranking);

/// "[lo, hi]" over the inflations of each group's relations; "[]" for empty groups.
std::vector<std::string> group_ranges(const InflationReport& report, const std::vector<int>& groups, int n_groups);

}  // namespace dualre
