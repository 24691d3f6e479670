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

// Threshold-sweep CSV files and their precision-recall plots (SVG).

#ifndef INVLAB_HARNESS_PLOT_H_
#define INVLAB_HARNESS_PLOT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "invlab/mlc.h"

namespace invlab::harness {

struct PrPoint {
  std::string victim;
  double threshold = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Header `victim,threshold,precision,recall,f1`, one row per sweep point.
std::string SweepCsv(const std::string& victim, const SweepResult& sweep);
void WriteSweepCsv(const std::filesystem::path& path, const std::string& victim,
                   const SweepResult& sweep);

// Throws ParseError on malformed rows and InvalidArgument when the file has
// no data rows.
std::vector<PrPoint> ParseSweepCsv(const std::string& text,
                                   const std::string& source = "sweep");
std::vector<PrPoint> ReadSweepCsv(const std::filesystem::path& path);

// One polyline per victim (first-appearance order) through its points in
// threshold order, recall on x and precision on y, with one marker per
// point.
std::string RenderPrCurveSvg(const std::vector<PrPoint>& points);

// Writes the SVG to `output` and the CSV it was drawn from next to it
// (same stem, .csv extension).
void EmitPrCurve(const std::filesystem::path& sweep_csv,
                 const std::filesystem::path& output);

}  // namespace invlab::harness

#endif  // INVLAB_HARNESS_PLOT_H_
