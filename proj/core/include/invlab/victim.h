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

// Frozen sentence encoders under attack. Attackers only ever see
// SentenceEmbedding values; nothing in this header exposes weights.

#ifndef INVLAB_VICTIM_H_
#define INVLAB_VICTIM_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "invlab/corpus.h"

namespace invlab {

struct SentenceEmbedding {
  std::vector<float> values;
  std::string victim_id;

  std::size_t dim() const { return values.size(); }
};

class VictimModel {
 public:
  virtual ~VictimModel() = default;

  virtual const std::string& id() const = 0;
  virtual int dim() const = 0;

  // Deterministic and reentrant.
  virtual SentenceEmbedding Embed(const AnnotatedSentence& sentence) const = 0;

  // Default loops over Embed(); remote providers batch requests.
  virtual std::vector<SentenceEmbedding> EmbedBatch(
      std::span<const AnnotatedSentence> sentences) const;
};

enum class ToyVictimKind { kBagOfEmbeddings, kTinyTransformer };

ToyVictimKind ParseToyVictimKind(std::string_view name);
std::string_view ToString(ToyVictimKind kind);

// Fixed random encoders with uniform(-0.1, 0.1) weights drawn from `seed`.
// Sentences must be encoded with `vocab`; an empty sentence embeds to the
// zero vector.
std::unique_ptr<VictimModel> MakeToyVictim(ToyVictimKind kind, int dim,
                                           std::uint64_t seed,
                                           const Vocabulary& vocab);

struct RemoteVictimOptions {
  std::string url;  // e.g. http://127.0.0.1:8080/embed
  int dim = 0;
  int timeout_ms = 10000;
  int retries = 2;
  std::size_t batch_size = 64;
};

// Client for an HTTP embedding provider:
//   POST {"texts": [...]}  ->  {"embeddings": [[...], ...]}
// Replies with a wrong count or width raise ProtocolError.
std::unique_ptr<VictimModel> MakeRemoteVictim(RemoteVictimOptions options);

// Forwards to another victim and counts how many sentences it embedded.
class CountingVictim : public VictimModel {
 public:
  explicit CountingVictim(const VictimModel& inner) : inner_(inner) {}

  const std::string& id() const override { return inner_.id(); }
  int dim() const override { return inner_.dim(); }
  SentenceEmbedding Embed(const AnnotatedSentence& sentence) const override;
  std::vector<SentenceEmbedding> EmbedBatch(
      std::span<const AnnotatedSentence> sentences) const override;

  std::size_t queries() const { return queries_.load(); }

 private:
  const VictimModel& inner_;
  mutable std::atomic<std::size_t> queries_{0};
};

// Embeds `corpus` through `victim`, persisting raw float32 vectors at
// `cache_path` with a sidecar `<cache_path>.manifest`. A warm cache for the
// same victim and corpus is returned without querying the victim; a cache
// for a different victim or corpus raises StaleCacheError.
std::vector<SentenceEmbedding> EmbedCorpusCached(
    const VictimModel& victim, std::span<const AnnotatedSentence> corpus,
    const std::filesystem::path& cache_path);

}  // namespace invlab

#endif  // INVLAB_VICTIM_H_
