// Copyright 2026 The invlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "invlab/harness/compare.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <vector>

#include "invlab/error.h"

namespace invlab::harness {

namespace {

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string Fmt(const std::optional<double>& v) { return v ? Fmt(*v) : "na"; }

std::string Pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

ComparisonTable CompareAttackers(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw InvalidArgument("nothing to compare");
  for (const auto& r : reports) {
    if (r.corpus_hash != reports.front().corpus_hash) {
      throw InvalidArgument("reports come from different corpora (" +
                            reports.front().corpus_hash + " vs " +
                            r.corpus_hash + ")");
    }
    if (r.victim_id != reports.front().victim_id) {
      throw InvalidArgument("reports attack different victims (" +
                            reports.front().victim_id + " vs " + r.victim_id +
                            ")");
    }
  }

  ComparisonTable table;
  table.csv = "victim,attacker,precision,recall,f1,swr_diff,nerr\n";
  for (const auto& r : reports) {
    table.csv += r.victim_id + "," + r.attacker + "," + Fmt(r.precision) + "," +
                 Fmt(r.recall) + "," + Fmt(r.f1) + "," + Fmt(r.swr_diff) + "," +
                 Fmt(r.nerr) + "\n";
  }

  double best_f1 = reports.front().f1;
  for (const auto& r : reports) best_f1 = std::max(best_f1, r.f1);

  struct Row {
    std::string label;
    std::vector<std::string> cells;
  };
  std::vector<Row> rows = {{"attacker", {}}, {"precision", {}}, {"recall", {}},
                           {"f1", {}},       {"swr_diff", {}},  {"nerr", {}}};
  for (const auto& r : reports) {
    rows[0].cells.push_back(r.attacker);
    rows[1].cells.push_back(Fmt(r.precision));
    rows[2].cells.push_back(Fmt(r.recall));
    rows[3].cells.push_back(r.f1 == best_f1 ? "**" + Fmt(r.f1) + "**" : Fmt(r.f1));
    rows[4].cells.push_back(Fmt(r.swr_diff));
    rows[5].cells.push_back(Fmt(r.nerr));
  }
  std::size_t label_w = 0;
  for (const auto& row : rows) label_w = std::max(label_w, row.label.size());
  std::vector<std::size_t> col_w(reports.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.cells.size(); ++c) {
      col_w[c] = std::max(col_w[c], row.cells[c].size());
    }
  }
  table.text = "victim: " + reports.front().victim_id + "\n";
  for (const auto& row : rows) {
    std::string line = Pad(row.label, label_w);
    for (std::size_t c = 0; c < row.cells.size(); ++c) {
      line += "  " + Pad(row.cells[c], col_w[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    table.text += line + "\n";
  }
  return table;
}

void WriteComparison(const ComparisonTable& table,
                     const std::filesystem::path& stem) {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  for (const auto& [ext, body] :
       {std::pair<const char*, const std::string*>{".csv", &table.csv},
        {".txt", &table.text}}) {
    const std::filesystem::path path = stem.string() + ext;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << *body;
  }
}

}  // namespace invlab::harness
