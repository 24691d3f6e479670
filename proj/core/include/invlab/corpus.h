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

// Corpus ingestion: record files, stop-word lexicons, the shared
// whitespace vocabulary and deterministic train/dev/test splits.

#ifndef INVLAB_CORPUS_H_
#define INVLAB_CORPUS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace invlab {

using TokenId = std::int32_t;

// Lowercases ASCII and splits on whitespace.
std::vector<std::string> SplitWords(std::string_view text);
std::string ToLower(std::string_view text);

class StopwordLexicon {
 public:
  StopwordLexicon() = default;
  explicit StopwordLexicon(std::vector<std::string> words);

  static StopwordLexicon Load(const std::filesystem::path& path);

  // Case-insensitive membership.
  bool Contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

struct AnnotatedSentence {
  std::string text;
  // Lowercased whitespace tokens of `text`; set at load time.
  std::vector<std::string> words;
  // Ids under a Vocabulary; empty until EncodeCorpus() has run.
  std::vector<TokenId> token_ids;
  std::vector<std::string> entities;
  // One flag per entry of `words`.
  std::vector<bool> stopword_mask;
  std::optional<std::string> context;

  std::size_t length() const { return words.size(); }
};

// Builds a sentence from raw text, validating that every entity occurs in
// the text. Throws InvalidArgument when the text has no tokens.
AnnotatedSentence MakeSentence(std::string text,
                               std::vector<std::string> entities,
                               const StopwordLexicon& stopwords,
                               std::optional<std::string> context = {});

// Reads the line-delimited record format:
//   {"text": "...", "entities": ["..."], "context": "..."}
// Throws ParseError (with line number) and EmptyCorpusError.
std::vector<AnnotatedSentence> LoadCorpus(const std::filesystem::path& path,
                                          const StopwordLexicon& stopwords);

// Hash over the sentence texts in order; identifies a corpus for caches.
std::string CorpusHash(std::span<const AnnotatedSentence> corpus);

class Vocabulary {
 public:
  static constexpr std::string_view kPad = "<pad>";
  static constexpr std::string_view kEos = "<eos>";
  static constexpr std::string_view kUnk = "<unk>";
  static constexpr TokenId kPadId = 0;
  static constexpr TokenId kEosId = 1;
  static constexpr TokenId kUnkId = 2;
  static constexpr std::size_t kNumSpecials = 3;

  // Most frequent words first (ties lexicographic), capped at
  // max_size - 3 content tokens. Requires a non-empty corpus and
  // max_size >= 4.
  static Vocabulary Build(std::span<const AnnotatedSentence> corpus,
                          std::size_t max_size);

  // Restores a vocabulary from its content tokens in id order.
  static Vocabulary FromContentTokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  std::size_t content_size() const { return tokens_.size() - kNumSpecials; }
  bool IsSpecial(TokenId id) const {
    return id >= 0 && id < static_cast<TokenId>(kNumSpecials);
  }

  // Id of a content word; <unk> for unknown words and for the special
  // strings themselves.
  TokenId Lookup(std::string_view word) const;
  const std::string& Token(TokenId id) const { return tokens_.at(id); }
  std::span<const std::string> tokens() const { return tokens_; }

  // Throws InvalidArgument on text without tokens.
  std::vector<TokenId> Tokenize(std::string_view text) const;
  std::string Detokenize(std::span<const TokenId> ids) const;

  std::string Hash() const;

 private:
  explicit Vocabulary(std::vector<std::string> tokens);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Fills token_ids for every sentence.
void EncodeCorpus(const Vocabulary& vocab,
                  std::span<AnnotatedSentence> corpus);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  std::vector<AnnotatedSentence> train;
  std::vector<AnnotatedSentence> dev;
  std::vector<AnnotatedSentence> test;
  // Positions into the source corpus, parallel to the lists above.
  std::vector<std::size_t> train_index;
  std::vector<std::size_t> dev_index;
  std::vector<std::size_t> test_index;
  std::uint64_t seed = 0;
  SplitRatios ratios;
};

// Seeded shuffle, then a contiguous partition. Train and dev sizes are the
// rounded ratio shares; test takes the rest.
CorpusSplit SplitCorpus(std::span<const AnnotatedSentence> corpus,
                        SplitRatios ratios, std::uint64_t seed);

}  // namespace invlab

#endif  // INVLAB_CORPUS_H_
