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

// Experiment configuration. The on-disk form is flat `dotted.key = value`
// text; '#' starts a comment. Serialize() emits every key in sorted order,
// which is also what the config hash is computed over.

#ifndef INVLAB_HARNESS_CONFIG_H_
#define INVLAB_HARNESS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "invlab/corpus.h"

namespace invlab::harness {

struct ExperimentConfig {
  std::uint64_t seed = 0;

  struct Corpus {
    std::string path;
    std::string stopwords;
    SplitRatios ratios;
    std::size_t vocab_size = 500;
  } corpus;

  struct Victim {
    std::string kind = "bag-of-embeddings";  // or tiny-transformer, remote
    int dim = 64;
    std::uint64_t seed = 7;
    std::string url;
    int timeout_ms = 10000;
    int retries = 2;
  } victim;

  struct Attacker {
    std::string type = "geia";  // geia, mlc, msp
    int layers = 4;
    int heads = 4;
    int width = 128;
    int hidden = 128;  // msp
    int steps = 10;    // msp
    double lr = 3e-4;
    int batch = 64;
    int epochs = 10;
    double clip = 1.0;
  } attacker;

  struct Decode {
    std::string method = "beam";  // or nucleus
    int beam_size = 5;
    double top_p = 0.9;
    double temperature = 0.9;
    int max_len = 32;
    std::uint64_t seed = 0;
  } decode;

  struct Metrics {
    std::string prf_mode = "multiset";  // geia only; set predictors use set
    bool rouge_f = false;
    std::string es_victim_kind = "tiny-transformer";
    std::uint64_t es_victim_seed = 1009;
    bool perplexity = true;
    int lm_layers = 2;
    int lm_width = 64;
    int lm_epochs = 10;
    double sweep_interval = 0.05;
    // Split that invert/evaluate attack: test, or train for memorization
    // checks.
    std::string eval_split = "test";
  } metrics;

  std::string output_dir = "out";
};

// Every key with its current value.
std::map<std::string, std::string> ToKeyValues(const ExperimentConfig& config);
std::vector<std::string> ConfigKeys();

// Sets one key. Throws InvalidArgument on unknown keys or bad values.
void SetConfigValue(ExperimentConfig& config, std::string_view key,
                    std::string_view value);
// Parses "key=value".
void ApplyOverride(ExperimentConfig& config, std::string_view assignment);

// Starts from defaults. Throws ParseError with the line number.
ExperimentConfig ParseConfig(std::string_view text,
                             const std::string& source = "config");
ExperimentConfig LoadConfig(const std::filesystem::path& path);

// Throws InvalidArgument describing the first violated constraint.
void ValidateConfig(const ExperimentConfig& config);

std::string SerializeConfig(const ExperimentConfig& config);

// FNV-1a over the canonical serialization without output.dir, so the same
// experiment hashes identically wherever its outputs go.
std::string ConfigHash(const ExperimentConfig& config);

}  // namespace invlab::harness

#endif  // INVLAB_HARNESS_CONFIG_H_
