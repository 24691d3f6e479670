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

#include "invlab/metrics.h"

#include <cctype>
#include <cmath>
#include <iostream>
#include <map>
#include <unordered_map>

#include "invlab/error.h"

namespace invlab {

namespace {

void CheckSameLength(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InvalidArgument(std::string(what) + ": list lengths differ (" +
                          std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

std::unordered_map<TokenId, std::size_t> Counts(std::span<const TokenId> seq,
                                                 bool distinct) {
  std::unordered_map<TokenId, std::size_t> counts;
  for (TokenId t : seq) {
    auto& c = counts[t];
    c = distinct ? 1 : c + 1;
  }
  return counts;
}

std::size_t Total(const std::unordered_map<TokenId, std::size_t>& counts) {
  std::size_t n = 0;
  for (const auto& [t, c] : counts) n += c;
  return n;
}

}  // namespace

double F1Score(double precision, double recall) {
  if (precision + recall <= 0) return 0.0;
  return 2 * precision * recall / (precision + recall);
}

Prf MicroPrf(std::span<const std::vector<TokenId>> predictions,
             std::span<const std::vector<TokenId>> references, MatchMode mode) {
  CheckSameLength(predictions.size(), references.size(), "micro P/R/F1");
  const bool distinct = mode == MatchMode::kSet;
  std::size_t overlap = 0, predicted = 0, relevant = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    auto pred = Counts(predictions[i], distinct);
    auto ref = Counts(references[i], distinct);
    predicted += Total(pred);
    relevant += Total(ref);
    for (const auto& [token, c] : pred) {
      auto it = ref.find(token);
      if (it != ref.end()) overlap += std::min(c, it->second);
    }
  }
  if (relevant == 0) {
    throw InvalidArgument("micro P/R/F1: references contain no tokens");
  }
  Prf out;
  out.precision = predicted ? static_cast<double>(overlap) / predicted : 0.0;
  out.recall = static_cast<double>(overlap) / relevant;
  out.f1 = F1Score(out.precision, out.recall);
  return out;
}

std::optional<double> NamedEntityRecovery(
    std::span<const std::string> generated,
    std::span<const AnnotatedSentence> references) {
  CheckSameLength(generated.size(), references.size(), "NERR");
  std::size_t total = 0, recovered = 0;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    if (references[i].entities.empty()) continue;
    const auto words = SplitWords(generated[i]);
    for (const auto& entity : references[i].entities) {
      ++total;
      const auto needle = SplitWords(entity);
      if (needle.empty() || needle.size() > words.size()) continue;
      auto it = std::search(words.begin(), words.end(), needle.begin(),
                            needle.end());
      if (it != words.end()) ++recovered;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(recovered) / static_cast<double>(total);
}

double StopwordRatio(std::span<const std::vector<std::string>> token_lists,
                     const StopwordLexicon& lexicon) {
  std::size_t stop = 0, total = 0;
  for (const auto& tokens : token_lists) {
    for (const auto& t : tokens) {
      ++total;
      if (lexicon.Contains(t)) ++stop;
    }
  }
  if (total == 0) throw InvalidArgument("stop-word ratio of zero tokens");
  return static_cast<double>(stop) / static_cast<double>(total);
}

std::pair<std::size_t, std::size_t> ClippedNgramMatches(
    std::span<const TokenId> candidate, std::span<const TokenId> reference,
    int order) {
  const std::size_t n = static_cast<std::size_t>(order);
  if (order < 1 || candidate.size() < n) return {0, 0};
  std::map<std::vector<TokenId>, std::size_t> ref_counts;
  for (std::size_t i = 0; i + n <= reference.size(); ++i) {
    ++ref_counts[std::vector<TokenId>(reference.begin() + i,
                                      reference.begin() + i + n)];
  }
  std::map<std::vector<TokenId>, std::size_t> cand_counts;
  for (std::size_t i = 0; i + n <= candidate.size(); ++i) {
    ++cand_counts[std::vector<TokenId>(candidate.begin() + i,
                                       candidate.begin() + i + n)];
  }
  std::size_t matches = 0;
  for (const auto& [gram, c] : cand_counts) {
    auto it = ref_counts.find(gram);
    if (it != ref_counts.end()) matches += std::min(c, it->second);
  }
  return {matches, candidate.size() - n + 1};
}

double SentenceBleu(std::span<const TokenId> candidate,
                    std::span<const TokenId> reference, int max_order) {
  if (max_order < 1) throw InvalidArgument("BLEU order must be >= 1");
  if (candidate.empty()) return 0.0;
  double log_sum = 0;
  for (int k = 1; k <= max_order; ++k) {
    auto [matches, count] = ClippedNgramMatches(candidate, reference, k);
    double p;
    if (count == 0) {
      p = 1.0;
    } else if (matches == 0) {
      if (k == 1) return 0.0;
      p = 1.0 / static_cast<double>(count);
    } else {
      p = static_cast<double>(matches) / static_cast<double>(count);
    }
    log_sum += std::log(p) / max_order;
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  return brevity * std::exp(log_sum);
}

double CorpusMeanBleu(std::span<const std::vector<TokenId>> candidates,
                      std::span<const std::vector<TokenId>> references,
                      int max_order) {
  CheckSameLength(candidates.size(), references.size(), "BLEU");
  if (candidates.empty()) return 0.0;
  double sum = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    sum += SentenceBleu(candidates[i], references[i], max_order);
  }
  return sum / static_cast<double>(candidates.size());
}

std::size_t LongestCommonSubsequence(std::span<const TokenId> a,
                                     std::span<const TokenId> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore SentenceRouge(std::span<const TokenId> candidate,
                         std::span<const TokenId> reference,
                         RougeVariant variant) {
  if (reference.empty()) throw InvalidArgument("ROUGE of an empty reference");
  std::size_t overlap = 0;
  if (variant == RougeVariant::kRougeL) {
    overlap = LongestCommonSubsequence(candidate, reference);
  } else {
    overlap = ClippedNgramMatches(candidate, reference, 1).first;
  }
  RougeScore s;
  s.recall = static_cast<double>(overlap) / static_cast<double>(reference.size());
  s.precision = candidate.empty()
                    ? 0.0
                    : static_cast<double>(overlap) / static_cast<double>(candidate.size());
  s.f1 = F1Score(s.precision, s.recall);
  return s;
}

double CorpusMeanRouge(std::span<const std::vector<TokenId>> candidates,
                       std::span<const std::vector<TokenId>> references,
                       RougeVariant variant, bool f_measure) {
  CheckSameLength(candidates.size(), references.size(), "ROUGE");
  if (candidates.empty()) return 0.0;
  double sum = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto s = SentenceRouge(candidates[i], references[i], variant);
    sum += f_measure ? s.f1 : s.recall;
  }
  return sum / static_cast<double>(candidates.size());
}

std::optional<double> CosineSimilarity(std::span<const float> a,
                                       std::span<const float> b) {
  CheckSameLength(a.size(), b.size(), "cosine similarity");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return std::nullopt;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

AnnotatedSentence SentenceForEmbedding(const std::string& text,
                                       const Vocabulary& vocab) {
  AnnotatedSentence s;
  s.text = text;
  s.words = SplitWords(text);
  for (const auto& w : s.words) s.token_ids.push_back(vocab.Lookup(w));
  s.stopword_mask.assign(s.words.size(), false);
  return s;
}

}  // namespace

double EmbeddingSimilarity(
    const VictimModel& embedder, const Vocabulary& vocab,
    std::span<const std::pair<std::string, std::string>> pairs,
    std::size_t* skipped) {
  double sum = 0;
  std::size_t used = 0, dropped = 0;
  for (const auto& [generated, reference] : pairs) {
    auto a = embedder.Embed(SentenceForEmbedding(generated, vocab));
    auto b = embedder.Embed(SentenceForEmbedding(reference, vocab));
    auto cos = CosineSimilarity(a.values, b.values);
    if (!cos) {
      ++dropped;
      continue;
    }
    sum += *cos;
    ++used;
  }
  if (skipped) *skipped = dropped;
  if (dropped > 0) {
    std::cerr << "warning: embedding similarity skipped " << dropped
              << " pair(s) with a zero-norm embedding\n";
  }
  if (used == 0) throw InvalidArgument("embedding similarity: every pair skipped");
  return sum / static_cast<double>(used);
}

std::optional<double> Perplexity(const GeiaAttacker<float>& lm,
                                 std::span<const std::vector<TokenId>> sentences) {
  constexpr std::size_t kChunk = 64;
  const std::vector<float> zero(static_cast<std::size_t>(lm.config().embed_dim), 0.0f);
  std::vector<std::vector<TokenId>> chunk;
  double total = 0;
  std::size_t positions = 0;
  auto flush = [&]() {
    if (chunk.empty()) return;
    std::vector<std::vector<float>> rows(chunk.size(), zero);
    auto batch = BuildTrainingBatch(std::span<const std::vector<float>>(rows),
                                    std::span<const std::vector<TokenId>>(chunk));
    auto [sum, count] = lm.LossSum(batch);
    total += sum;
    positions += count;
    chunk.clear();
  };
  for (const auto& s : sentences) {
    if (s.empty()) continue;
    chunk.push_back(s);
    if (chunk.size() == kChunk) flush();
  }
  flush();
  if (positions == 0) return std::nullopt;
  return std::exp(total / static_cast<double>(positions));
}

std::string NormalizeForMatch(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::ispunct(c)) continue;
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

double ExactMatchRatio(std::span<const std::string> generated,
                       std::span<const std::string> references) {
  CheckSameLength(generated.size(), references.size(), "EMR");
  if (generated.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    if (NormalizeForMatch(generated[i]) == NormalizeForMatch(references[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(generated.size());
}

EditDistanceSummary EditDistance(std::span<const std::string> generated,
                                 std::span<const std::string> references) {
  CheckSameLength(generated.size(), references.size(), "edit distance");
  EditDistanceSummary out;
  if (generated.empty()) return out;
  std::vector<double> d;
  d.reserve(generated.size());
  for (std::size_t i = 0; i < generated.size(); ++i) {
    d.push_back(static_cast<double>(Levenshtein(generated[i], references[i])));
  }
  double sum = 0;
  for (double v : d) sum += v;
  out.mean = sum / static_cast<double>(d.size());
  std::sort(d.begin(), d.end());
  const std::size_t mid = d.size() / 2;
  out.median = d.size() % 2 ? d[mid] : 0.5 * (d[mid - 1] + d[mid]);
  return out;
}

}  // namespace invlab
