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

#ifndef INVLAB_HARNESS_REPORT_H_
#define INVLAB_HARNESS_REPORT_H_

#include <filesystem>
#include <string>

#include "invlab/metrics.h"

namespace invlab::harness {

// Flat `key=value` lines in a fixed key order. Absent optional metrics are
// written as `na`. Reals use six decimals.
std::string SerializeReport(const MetricsReport& report);
MetricsReport ParseReport(const std::string& text,
                          const std::string& source = "report");
MetricsReport LoadReport(const std::filesystem::path& path);

// One header line and one data row, same columns as the key-value form.
std::string ReportCsvHeader();
std::string ReportCsvRow(const MetricsReport& report);

}  // namespace invlab::harness

#endif  // INVLAB_HARNESS_REPORT_H_
