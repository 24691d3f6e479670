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

// Templated chit-chat corpus with known person entities ("first last"),
// used where a real dialogue corpus would otherwise be needed.

#ifndef INVLAB_HARNESS_SYNTHETIC_H_
#define INVLAB_HARNESS_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace invlab::harness {

struct SyntheticOptions {
  std::size_t sentences = 1000;
  std::size_t entities = 50;
  std::uint64_t seed = 0;
};

// Largest supported entity pool.
std::size_t MaxSyntheticEntities();

// The entity pool for a seed: `count` distinct two-word names.
std::vector<std::string> SyntheticEntities(std::size_t count, std::uint64_t seed);

// One corpus record per line, {"text": ..., "entities": [...]}.
std::vector<std::string> SyntheticRecords(const SyntheticOptions& options);

void WriteSyntheticCorpus(const SyntheticOptions& options,
                          const std::filesystem::path& path);

// English stop words, lowercase; superset of the template filler words.
const std::vector<std::string>& StopwordList();
void WriteStopwordList(const std::filesystem::path& path);

}  // namespace invlab::harness

#endif  // INVLAB_HARNESS_SYNTHETIC_H_
