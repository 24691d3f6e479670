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

// End-to-end experiment: prepare -> embed -> train -> invert -> evaluate.
//
// Each stage runs the earlier ones it needs, so any stage can be invoked on
// its own. Failures surface as StageError naming the stage; whatever was
// already written to the output directory stays there.
//
// Output directory layout:
//   config.txt         canonical config copy
//   config.hash        ConfigHash()
//   checkpoint.manifest, checkpoint.bin
//   train_log.jsonl    {epoch, train_loss, dev_loss, wall_seconds}
//   inversions.jsonl   {index, kind, reference, decoded, tokens}
//   report.txt         flat key=value MetricsReport
//   report.csv
//   sweep.csv          MLC only
//
// Victim embeddings are cached under the cache root (see DefaultCacheRoot)
// keyed by victim id and corpus hash. A checkpoint in the output directory
// is reused when its config hash, corpus hash, vocabulary and victim match.

#ifndef INVLAB_HARNESS_EXPERIMENT_H_
#define INVLAB_HARNESS_EXPERIMENT_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "invlab/corpus.h"
#include "invlab/geia.h"
#include "invlab/harness/config.h"
#include "invlab/metrics.h"
#include "invlab/mlc.h"
#include "invlab/msp.h"
#include "invlab/victim.h"

namespace invlab::harness {

inline constexpr const char* kCacheEnvVar = "INVLAB_CACHE_DIR";

// $INVLAB_CACHE_DIR, or ".invlab-cache" in the working directory.
std::filesystem::path DefaultCacheRoot();

struct ExperimentOptions {
  // Empty: DefaultCacheRoot().
  std::filesystem::path cache_root;
  // Replaces the victim described by the config (tests, custom providers).
  std::shared_ptr<const VictimModel> victim;
  // Progress lines; null for silence.
  std::ostream* log = nullptr;
  // Decoding workers; 0 picks the hardware concurrency.
  int threads = 0;
};

struct InversionResult {
  std::size_t index = 0;  // position in the loaded corpus
  std::string kind;       // "sequence" or "set"
  std::vector<TokenId> tokens;
  std::string reference;
  std::string decoded;
};

std::vector<InversionResult> LoadInversions(const std::filesystem::path& path);

class Experiment {
 public:
  explicit Experiment(ExperimentConfig config, ExperimentOptions options = {});
  ~Experiment();

  const ExperimentConfig& config() const { return config_; }
  const std::string& config_hash() const { return config_hash_; }
  std::filesystem::path output_dir() const { return config_.output_dir; }

  // Loads the corpus, builds the vocabulary, splits, and writes the config
  // copy and hash.
  void Prepare();
  // Embeds the whole corpus through the (cached) victim.
  void Embed();
  // Trains the configured attacker or reloads a matching checkpoint.
  void Train();
  // Attacks the evaluation split (metrics.eval_split) and writes
  // inversions.jsonl.
  std::vector<InversionResult> Invert();
  // Scores inversions.jsonl against the evaluation split and writes the
  // report.
  MetricsReport Evaluate();
  // MLC threshold sweep over the test split; writes sweep.csv.
  SweepResult Sweep();
  // Every stage in order.
  MetricsReport Run();

  // Sentences sent to the attacked victim by this object so far.
  std::size_t victim_queries() const;
  // False when Train() reused an existing checkpoint.
  bool trained() const { return trained_; }

  const Vocabulary& vocab() const;
  const CorpusSplit& split() const;
  const VictimModel& victim() const;

 private:
  template <typename F>
  auto Stage(const char* name, F&& body) -> decltype(body());

  void PrepareImpl();
  void EmbedImpl();
  void TrainImpl();
  std::vector<InversionResult> InvertImpl();
  MetricsReport EvaluateImpl();
  SweepResult SweepImpl();

  const std::vector<AnnotatedSentence>& EvalSentences() const;
  const std::vector<std::size_t>& EvalIndex() const;
  void BuildAttacker();
  bool TryLoadCheckpoint();
  std::vector<SentenceEmbedding> Select(const std::vector<std::size_t>& idx) const;
  std::optional<double> FluencyPerplexity(
      const std::vector<std::vector<TokenId>>& outputs);
  void Log(const std::string& line) const;

  ExperimentConfig config_;
  ExperimentOptions options_;
  std::string config_hash_;
  std::filesystem::path cache_root_;

  bool prepared_ = false;
  std::vector<AnnotatedSentence> corpus_;
  std::string corpus_hash_;
  std::unique_ptr<Vocabulary> vocab_;
  CorpusSplit split_;
  StopwordLexicon stopwords_;

  std::shared_ptr<const VictimModel> victim_;
  std::unique_ptr<CountingVictim> counting_;
  std::vector<SentenceEmbedding> embeddings_;  // parallel to corpus_

  std::unique_ptr<GeiaAttacker<float>> geia_;
  std::unique_ptr<MlcAttacker<float>> mlc_;
  std::unique_ptr<MspAttacker<float>> msp_;
  std::optional<std::vector<InversionResult>> inversions_;
  bool attacker_ready_ = false;
  bool trained_ = false;
};

}  // namespace invlab::harness

#endif  // INVLAB_HARNESS_EXPERIMENT_H_
