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

// Side-by-side attacker comparison for one victim and corpus.

#ifndef INVLAB_HARNESS_COMPARE_H_
#define INVLAB_HARNESS_COMPARE_H_

#include <filesystem>
#include <span>
#include <string>

#include "invlab/metrics.h"

namespace invlab::harness {

struct ComparisonTable {
  std::string csv;   // victim,attacker,precision,recall,f1,swr_diff,nerr
  std::string text;  // metric rows x attacker columns; best F1 in **bold**
};

// Throws InvalidArgument for an empty list or reports that disagree on
// corpus hash or victim id.
ComparisonTable CompareAttackers(std::span<const MetricsReport> reports);

// Writes `<stem>.csv` and `<stem>.txt`.
void WriteComparison(const ComparisonTable& table,
                     const std::filesystem::path& stem);

}  // namespace invlab::harness

#endif  // INVLAB_HARNESS_COMPARE_H_
