// SPDX-License-Identifier: Apache-2.0
#include "dualre/report.hpp"

#include "dualre/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

namespace dualre {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw ContractError("csv: row width does not match the header");
  rows.push_back(std::move(row));
}

void CsvTable::write(std::ostream& out) const {
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
}

void CsvTable::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write(out);
  if (!out) throw IoError("write failed: " + path);
}

CsvTable history_table(const TrainHistory& history) {
  CsvTable t{{"epoch", "loss_ha", "loss_ds", "loss_penalty", "dev_f1", "threshold"}, {}};
  for (const EpochRecord& r : history.epochs) {
    t.add_row({std::to_string(r.epoch), format_number(r.loss_ha), format_number(r.loss_ds),
               format_number(r.loss_penalty), format_number(r.dev_f1),
               r.threshold ? format_number(*r.threshold) : "NA"});
  }
  return t;
}

CsvTable metrics_table(const std::vector<MetricsRow>& rows) {
  CsvTable t{{"mode", "seed", "split", "precision", "recall", "f1", "threshold"}, {}};
  for (const MetricsRow& r : rows) {
    t.add_row({r.mode, std::to_string(r.seed), r.split, format_number(r.result.precision),
               format_number(r.result.recall), format_number(r.result.f1),
               r.threshold ? format_number(*r.threshold) : "NA"});
  }
  return t;
}

CsvTable pr_table(const std::vector<PrPoint>& curve) {
  CsvTable t{{"rank", "score", "recall", "precision"}, {}};
  for (const PrPoint& p : curve) {
    t.add_row({std::to_string(p.rank), format_number(p.score), format_number(p.recall), format_number(p.precision)});
  }
  return t;
}

CsvTable groups_table(const std::vector<GroupResult>& groups, const std::vector<std::string>& ranges) {
  CsvTable t{{"group", "inflation_range", "n_relations", "f1"}, {}};
  for (const GroupResult& g : groups) {
    const std::string range = static_cast<std::size_t>(g.group) < ranges.size() ? ranges[g.group] : "[]";
    t.add_row({std::to_string(g.group), "\"" + range + "\"", std::to_string(g.n_relations), format_number(g.result.f1)});
  }
  return t;
}

CsvTable bias_table(const InflationReport& report, const std::vector<int>& groups) {
  CsvTable t{{"relation_id", "ha_freq", "ds_freq", "inflation", "group"}, {}};
  for (std::size_t r = 0; r < report.size(); ++r) {
    t.add_row({std::to_string(r), format_number(report.ha_freq[r]), format_number(report.ds_freq[r]),
               format_number(report.inflation[r]), r < groups.size() ? std::to_string(groups[r]) : "NA"});
  }
  return t;
}

CsvTable fit_table(const FamilyRanking& ranking) {
  CsvTable t{{"family", "params", "ks_D", "p_value"}, {}};
  for (const FitResult& f : ranking.fits) {
    std::string params;
    for (std::size_t i = 0; i < f.params.size(); ++i) params += (i ? ";" : "") + format_number(f.params[i]);
    t.add_row({std::string(to_string(f.family)), params, format_number(f.ks_statistic), format_number(f.p_value)});
  }
  for (const auto& [family, reason] : ranking.skipped) {
    t.add_row({std::string(to_string(family)), "NA", "NA", "NA"});
  }
  return t;
}

std::vector<std::string> group_ranges(const InflationReport& report, const std::vector<int>& groups, int n_groups) {
  std::vector<std::string> out;
  for (int g = 0; g < n_groups; ++g) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < groups.size() && r < report.size(); ++r) {
      if (groups[r] != g) continue;
      lo = std::min(lo, report.inflation[r]);
      hi = std::max(hi, report.inflation[r]);
    }
    out.push_back(lo > hi ? "[]" : "[" + format_number(lo) + ", " + format_number(hi) + "]");
  }
  return out;
}

}  // namespace dualre
