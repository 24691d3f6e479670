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

#include "invlab/harness/plot.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "invlab/error.h"

namespace invlab::harness {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 520, kHeight = 400;
constexpr double kLeft = 60, kRight = 150, kTop = 20, kBottom = 50;
constexpr std::array<const char*, 6> kColors = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string Num(double v, const char* fmt = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double X(double recall) { return kLeft + recall * (kWidth - kLeft - kRight); }
double Y(double precision) {
  return kHeight - kBottom - precision * (kHeight - kTop - kBottom);
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string SweepCsv(const std::string& victim, const SweepResult& sweep) {
  if (victim.find_first_of(",\n") != std::string::npos) {
    throw InvalidArgument("victim id may not contain commas or newlines");
  }
  std::string out = "victim,threshold,precision,recall,f1\n";
  for (const auto& p : sweep.points) {
    out += victim + "," + Num(p.threshold, "%.4f") + "," + Num(p.precision) + "," +
           Num(p.recall) + "," + Num(p.f1) + "\n";
  }
  return out;
}

void WriteSweepCsv(const fs::path& path, const std::string& victim,
                   const SweepResult& sweep) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << SweepCsv(victim, sweep);
}

std::vector<PrPoint> ParseSweepCsv(const std::string& text,
                                   const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<PrPoint> points;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("victim,", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw ParseError(source, line_no, "expected 5 columns");
    PrPoint p;
    p.victim = cells[0];
    try {
      p.threshold = std::stod(cells[1]);
      p.precision = std::stod(cells[2]);
      p.recall = std::stod(cells[3]);
      p.f1 = std::stod(cells[4]);
    } catch (const std::exception&) {
      throw ParseError(source, line_no, "non-numeric cell");
    }
    points.push_back(std::move(p));
  }
  if (points.empty()) throw InvalidArgument(source + ": sweep CSV has no data rows");
  return points;
}

std::vector<PrPoint> ReadSweepCsv(const fs::path& path) {
  return ParseSweepCsv(ReadText(path), path.string());
}

std::string RenderPrCurveSvg(const std::vector<PrPoint>& points) {
  if (points.empty()) throw InvalidArgument("no points to plot");
  std::vector<std::string> victims;
  for (const auto& p : points) {
    if (std::find(victims.begin(), victims.end(), p.victim) == victims.end()) {
      victims.push_back(p.victim);
    }
  }

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // Axes and ticks.
  svg << "<g stroke=\"black\" fill=\"none\">\n";
  svg << "<line x1=\"" << X(0) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(1)
      << "\" y2=\"" << Y(0) << "\"/>\n";
  svg << "<line x1=\"" << X(0) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(0)
      << "\" y2=\"" << Y(1) << "\"/>\n";
  svg << "</g>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    svg << "<text x=\"" << X(v) << "\" y=\"" << Y(0) + 15
        << "\" text-anchor=\"middle\">" << Num(v, "%.1f") << "</text>\n";
    svg << "<text x=\"" << X(0) - 6 << "\" y=\"" << Y(v) + 4
        << "\" text-anchor=\"end\">" << Num(v, "%.1f") << "</text>\n";
  }
  svg << "<text x=\"" << X(0.5) << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">recall</text>\n";
  svg << "<text x=\"15\" y=\"" << Y(0.5)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " << Y(0.5)
      << ")\">precision</text>\n";

  for (std::size_t v = 0; v < victims.size(); ++v) {
    std::vector<PrPoint> curve;
    for (const auto& p : points) {
      if (p.victim == victims[v]) curve.push_back(p);
    }
    std::stable_sort(curve.begin(), curve.end(),
                     [](const PrPoint& a, const PrPoint& b) {
                       return a.threshold < b.threshold;
                     });
    const char* color = kColors[v % kColors.size()];
    svg << "<g class=\"curve\" data-victim=\"" << Escape(victims[v]) << "\">\n";
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (std::size_t i = 0; i < curve.size(); ++i) {
      svg << (i ? " " : "") << Num(X(curve[i].recall), "%.2f") << ","
          << Num(Y(curve[i].precision), "%.2f");
    }
    svg << "\"/>\n";
    for (const auto& p : curve) {
      svg << "<circle class=\"marker\" cx=\"" << Num(X(p.recall), "%.2f")
          << "\" cy=\"" << Num(Y(p.precision), "%.2f") << "\" r=\"3\" fill=\""
          << color << "\"><title>t=" << Num(p.threshold, "%.2f")
          << "</title></circle>\n";
    }
    const double ly = kTop + 10 + 16.0 * static_cast<double>(v);
    svg << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly << "\" x2=\""
        << kWidth - kRight + 30 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\"/>\n";
    svg << "<text x=\"" << kWidth - kRight + 34 << "\" y=\"" << ly + 4 << "\">"
        << Escape(victims[v].substr(0, 22)) << "</text>\n";
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void EmitPrCurve(const fs::path& sweep_csv, const fs::path& output) {
  const std::string text = ReadText(sweep_csv);
  const auto points = ParseSweepCsv(text, sweep_csv.string());
  if (output.has_parent_path()) fs::create_directories(output.parent_path());
  {
    std::ofstream out(output, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + output.string());
    out << RenderPrCurveSvg(points);
  }
  fs::path csv_copy = output;
  csv_copy.replace_extension(".csv");
  if (!fs::exists(csv_copy) || !fs::equivalent(csv_copy, sweep_csv)) {
    std::ofstream out(csv_copy, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + csv_copy.string());
    out << text;
  }
}

}  // namespace invlab::harness
