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

// Evaluation battery for inversion outputs: token-level micro P/R/F1,
// named-entity recovery, stop-word ratio, BLEU, ROUGE, embedding
// similarity, perplexity, exact match and edit distance.

#ifndef INVLAB_METRICS_H_
#define INVLAB_METRICS_H_

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "invlab/corpus.h"
#include "invlab/geia.h"
#include "invlab/victim.h"

namespace invlab {

enum class MatchMode { kSet, kMultiset };

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Harmonic mean, 0 when both inputs are 0.
double F1Score(double precision, double recall);

// Micro-averaged over sentences. Set mode deduplicates each side first;
// multiset mode clips counts. Throws InvalidArgument when the references
// hold no tokens at all.
Prf MicroPrf(std::span<const std::vector<TokenId>> predictions,
             std::span<const std::vector<TokenId>> references, MatchMode mode);

// Fraction of reference entities whose lowercased word sequence appears
// contiguously in the lowercased generated text. nullopt when no reference
// sentence has an entity.
std::optional<double> NamedEntityRecovery(
    std::span<const std::string> generated,
    std::span<const AnnotatedSentence> references);

// Stop-word tokens over all tokens. Throws when there are no tokens.
double StopwordRatio(std::span<const std::vector<std::string>> token_lists,
                     const StopwordLexicon& lexicon);
inline double StopwordRatioDiff(double attack, double testset) {
  return attack - testset;
}

// Clipped n-gram matches and candidate n-gram count for one order.
std::pair<std::size_t, std::size_t> ClippedNgramMatches(
    std::span<const TokenId> candidate, std::span<const TokenId> reference,
    int order);

// Sentence BLEU with uniform weights over orders 1..max_order and the
// brevity penalty. For orders >= 2 a zero match count is replaced by 1;
// an order for which the candidate has no n-grams contributes precision 1.
// An empty candidate scores 0.
double SentenceBleu(std::span<const TokenId> candidate,
                    std::span<const TokenId> reference, int max_order);
double CorpusMeanBleu(std::span<const std::vector<TokenId>> candidates,
                      std::span<const std::vector<TokenId>> references,
                      int max_order);

enum class RougeVariant { kRouge1, kRougeL };

struct RougeScore {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

std::size_t LongestCommonSubsequence(std::span<const TokenId> a,
                                     std::span<const TokenId> b);

// Throws InvalidArgument on an empty reference.
RougeScore SentenceRouge(std::span<const TokenId> candidate,
                         std::span<const TokenId> reference,
                         RougeVariant variant);
// Corpus mean of recall, or of F1 when `f_measure` is set.
double CorpusMeanRouge(std::span<const std::vector<TokenId>> candidates,
                       std::span<const std::vector<TokenId>> references,
                       RougeVariant variant, bool f_measure = false);

// nullopt when either vector has zero norm.
std::optional<double> CosineSimilarity(std::span<const float> a,
                                       std::span<const float> b);

// Mean cosine between embeddings of generated and reference texts under
// `embedder`. Pairs with a zero-norm side are skipped; throws when every
// pair is skipped. `skipped` receives the number of skipped pairs.
double EmbeddingSimilarity(
    const VictimModel& embedder, const Vocabulary& vocab,
    std::span<const std::pair<std::string, std::string>> pairs,
    std::size_t* skipped = nullptr);

// exp of the mean per-token cross-entropy (including <eos>) of `lm` over
// the non-empty sentences; nullopt when every sentence is empty. The
// language model is an unconditional decoder: every sequence is conditioned
// on the same all-zero embedding.
std::optional<double> Perplexity(const GeiaAttacker<float>& lm,
                  std::span<const std::vector<TokenId>> sentences);

// Lowercase, drop ASCII punctuation, collapse whitespace.
std::string NormalizeForMatch(std::string_view text);
double ExactMatchRatio(std::span<const std::string> generated,
                       std::span<const std::string> references);

// Levenshtein distance with unit costs over any random-access sequences.
template <typename Seq>
std::size_t Levenshtein(const Seq& a, const Seq& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

struct EditDistanceSummary {
  double mean = 0;
  double median = 0;
};

// Character-level distances between paired strings.
EditDistanceSummary EditDistance(std::span<const std::string> generated,
                                 std::span<const std::string> references);

struct MetricsReport {
  std::string attacker;
  std::string victim_id;
  std::string corpus_hash;
  std::string config_hash;
  std::string decode;
  std::size_t sentences = 0;

  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::optional<double> nerr;
  double swr_attack = 0;
  double swr_testset = 0;
  double swr_diff = 0;
  double rouge1 = 0;
  double rougeL = 0;
  double bleu1 = 0;
  double bleu2 = 0;
  double bleu4 = 0;
  std::optional<double> embedding_similarity;
  std::optional<double> perplexity;
  double emr = 0;
  double edit_distance_mean = 0;
  double edit_distance_median = 0;

  // MLC only.
  std::optional<double> threshold;
  std::string sweep_csv;
};

}  // namespace invlab

#endif  // INVLAB_METRICS_H_
