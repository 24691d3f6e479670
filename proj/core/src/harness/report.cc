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

#include "invlab/harness/report.h"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "invlab/error.h"

namespace invlab::harness {

namespace {

std::string Real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string OptReal(const std::optional<double>& v) {
  return v ? Real(*v) : "na";
}

double ParseReal(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("report field '" + key + "' is not a number: " + v);
}

std::optional<double> ParseOptReal(const std::string& key, const std::string& v) {
  if (v == "na") return std::nullopt;
  return ParseReal(key, v);
}

struct Column {
  std::string key;
  std::function<std::string(const MetricsReport&)> get;
  std::function<void(MetricsReport&, const std::string&)> set;
};

#define TEXT_COL(name)                                                  \
  Column{#name, [](const MetricsReport& r) { return r.name; },          \
         [](MetricsReport& r, const std::string& v) { r.name = v; }}
#define REAL_COL(name)                                                  \
  Column{#name, [](const MetricsReport& r) { return Real(r.name); },    \
         [](MetricsReport& r, const std::string& v) {                   \
           r.name = ParseReal(#name, v);                                \
         }}
#define OPT_COL(name)                                                   \
  Column{#name, [](const MetricsReport& r) { return OptReal(r.name); }, \
         [](MetricsReport& r, const std::string& v) {                   \
           r.name = ParseOptReal(#name, v);                             \
         }}

const std::vector<Column>& Columns() {
  static const std::vector<Column> cols = {
      TEXT_COL(attacker),
      TEXT_COL(victim_id),
      TEXT_COL(corpus_hash),
      TEXT_COL(config_hash),
      TEXT_COL(decode),
      Column{"sentences",
             [](const MetricsReport& r) { return std::to_string(r.sentences); },
             [](MetricsReport& r, const std::string& v) {
               r.sentences = static_cast<std::size_t>(ParseReal("sentences", v));
             }},
      REAL_COL(precision),
      REAL_COL(recall),
      REAL_COL(f1),
      OPT_COL(nerr),
      REAL_COL(swr_attack),
      REAL_COL(swr_testset),
      REAL_COL(swr_diff),
      REAL_COL(rouge1),
      REAL_COL(rougeL),
      REAL_COL(bleu1),
      REAL_COL(bleu2),
      REAL_COL(bleu4),
      OPT_COL(embedding_similarity),
      OPT_COL(perplexity),
      REAL_COL(emr),
      REAL_COL(edit_distance_mean),
      REAL_COL(edit_distance_median),
      OPT_COL(threshold),
      TEXT_COL(sweep_csv),
  };
  return cols;
}

#undef TEXT_COL
#undef REAL_COL
#undef OPT_COL

}  // namespace

std::string SerializeReport(const MetricsReport& report) {
  std::string out;
  for (const auto& c : Columns()) out += c.key + "=" + c.get(report) + "\n";
  return out;
}

MetricsReport ParseReport(const std::string& text, const std::string& source) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  MetricsReport r;
  for (const auto& c : Columns()) {
    auto it = kv.find(c.key);
    if (it == kv.end()) throw ParseError(source, 0, "missing field '" + c.key + "'");
    c.set(r, it->second);
  }
  return r;
}

MetricsReport LoadReport(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read report " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseReport(ss.str(), path.string());
}

std::string ReportCsvHeader() {
  std::string out;
  for (const auto& c : Columns()) {
    if (!out.empty()) out += ",";
    out += c.key;
  }
  return out;
}

std::string ReportCsvRow(const MetricsReport& report) {
  std::string out;
  bool first = true;
  for (const auto& c : Columns()) {
    if (!first) out += ",";
    first = false;
    out += c.get(report);
  }
  return out;
}

}  // namespace invlab::harness
