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

#include "invlab/corpus.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <utility>

#include "invlab/error.h"
#include "invlab/hash.h"
#include "invlab/rng.h"
#include "json.hpp"

namespace invlab {

std::string ToLower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() &&
           std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    std::size_t start = i;
    while (i < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    if (i > start) words.push_back(ToLower(text.substr(start, i - start)));
  }
  return words;
}

StopwordLexicon::StopwordLexicon(std::vector<std::string> words) {
  for (auto& w : words) words_.insert(ToLower(w));
}

StopwordLexicon StopwordLexicon::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stop-word lexicon " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& w : SplitWords(line)) words.push_back(std::move(w));
  }
  return StopwordLexicon(std::move(words));
}

bool StopwordLexicon::Contains(std::string_view word) const {
  return words_.count(ToLower(word)) > 0;
}

AnnotatedSentence MakeSentence(std::string text,
                               std::vector<std::string> entities,
                               const StopwordLexicon& stopwords,
                               std::optional<std::string> context) {
  AnnotatedSentence s;
  s.words = SplitWords(text);
  if (s.words.empty()) throw InvalidArgument("sentence has no tokens");
  const std::string lowered = ToLower(text);
  for (const auto& e : entities) {
    if (e.empty() || lowered.find(ToLower(e)) == std::string::npos) {
      throw InvalidArgument("entity '" + e + "' does not occur in text");
    }
  }
  s.stopword_mask.reserve(s.words.size());
  for (const auto& w : s.words) s.stopword_mask.push_back(stopwords.Contains(w));
  s.text = std::move(text);
  s.entities = std::move(entities);
  s.context = std::move(context);
  return s;
}

std::vector<AnnotatedSentence> LoadCorpus(const std::filesystem::path& path,
                                          const StopwordLexicon& stopwords) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus " + path.string());
  std::vector<AnnotatedSentence> corpus;
  std::string line;
  std::size_t line_no = 0;
  const std::string source = path.string();
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) {
          return std::isspace(c);
        })) {
      continue;
    }
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (!record.is_object() || !record.contains("text") ||
        !record["text"].is_string()) {
      throw ParseError(source, line_no, "record needs a string field 'text'");
    }
    std::vector<std::string> entities;
    if (record.contains("entities")) {
      const auto& list = record["entities"];
      if (!list.is_array()) {
        throw ParseError(source, line_no, "'entities' must be a list");
      }
      for (const auto& e : list) {
        if (!e.is_string()) {
          throw ParseError(source, line_no, "entities must be strings");
        }
        entities.push_back(e.get<std::string>());
      }
    }
    std::optional<std::string> context;
    if (record.contains("context")) {
      if (!record["context"].is_string()) {
        throw ParseError(source, line_no, "'context' must be a string");
      }
      context = record["context"].get<std::string>();
    }
    try {
      corpus.push_back(MakeSentence(record["text"].get<std::string>(),
                                    std::move(entities), stopwords,
                                    std::move(context)));
    } catch (const InvalidArgument& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (corpus.empty()) throw EmptyCorpusError("corpus " + source + " is empty");
  return corpus;
}

std::string CorpusHash(std::span<const AnnotatedSentence> corpus) {
  Fnv1a h;
  for (const auto& s : corpus) {
    h.Update(s.text);
    h.Update("\n");
  }
  return h.HexDigest();
}

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw InvalidArgument("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::FromContentTokens(std::vector<std::string> content) {
  std::vector<std::string> tokens = {std::string(kPad), std::string(kEos),
                                     std::string(kUnk)};
  tokens.insert(tokens.end(), std::make_move_iterator(content.begin()),
                std::make_move_iterator(content.end()));
  return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::Build(std::span<const AnnotatedSentence> corpus,
                             std::size_t max_size) {
  if (corpus.empty()) throw InvalidArgument("cannot build vocabulary: empty corpus");
  if (max_size < kNumSpecials + 1) {
    throw InvalidArgument("vocabulary max_size must be >= 4");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& s : corpus) {
    for (const auto& w : s.words) {
      if (w == kPad || w == kEos || w == kUnk) continue;
      ++counts[w];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  // std::map iteration is lexicographic; stable sort keeps that order on
  // frequency ties.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t keep = std::min(ranked.size(), max_size - kNumSpecials);
  std::vector<std::string> content;
  content.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) content.push_back(ranked[i].first);
  return FromContentTokens(std::move(content));
}

TokenId Vocabulary::Lookup(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end() || IsSpecial(it->second)) return kUnkId;
  return it->second;
}

std::vector<TokenId> Vocabulary::Tokenize(std::string_view text) const {
  auto words = SplitWords(text);
  if (words.empty()) throw InvalidArgument("cannot tokenize empty text");
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(Lookup(w));
  return ids;
}

std::string Vocabulary::Detokenize(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (!out.empty()) out.push_back(' ');
    out += Token(id);
  }
  return out;
}

std::string Vocabulary::Hash() const {
  Fnv1a h;
  for (const auto& t : tokens_) {
    h.Update(t);
    h.Update("\n");
  }
  return h.HexDigest();
}

void EncodeCorpus(const Vocabulary& vocab,
                  std::span<AnnotatedSentence> corpus) {
  for (auto& s : corpus) {
    s.token_ids.clear();
    s.token_ids.reserve(s.words.size());
    for (const auto& w : s.words) s.token_ids.push_back(vocab.Lookup(w));
  }
}

CorpusSplit SplitCorpus(std::span<const AnnotatedSentence> corpus,
                        SplitRatios ratios, std::uint64_t seed) {
  if (ratios.train < 0 || ratios.dev < 0 || ratios.test < 0) {
    throw InvalidArgument("split ratios must be non-negative");
  }
  if (std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9) {
    throw InvalidArgument("split ratios must sum to 1");
  }
  const std::size_t n = corpus.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(std::span<std::size_t>(order));

  const auto n_train = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::llround(ratios.train * n)));
  const auto n_dev = std::min<std::size_t>(
      n - n_train, static_cast<std::size_t>(std::llround(ratios.dev * n)));

  CorpusSplit split;
  split.seed = seed;
  split.ratios = ratios;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = order[i];
    if (i < n_train) {
      split.train.push_back(corpus[src]);
      split.train_index.push_back(src);
    } else if (i < n_train + n_dev) {
      split.dev.push_back(corpus[src]);
      split.dev_index.push_back(src);
    } else {
      split.test.push_back(corpus[src]);
      split.test_index.push_back(src);
    }
  }
  return split;
}

}  // namespace invlab
