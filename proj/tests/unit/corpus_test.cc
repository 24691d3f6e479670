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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "invlab/error.h"
#include "test_util.h"

namespace invlab {
namespace {

using testing::TempDir;
using testing::WriteFile;

TEST(SplitWordsTest, LowercasesOnWhitespace) {
  EXPECT_EQ(SplitWords("  Hello\tWorld \n ok "),
            (std::vector<std::string>{"hello", "world", "ok"}));
  EXPECT_TRUE(SplitWords("   ").empty());
}

TEST(MakeSentenceTest, MasksStopwordsAndChecksEntities) {
  StopwordLexicon lex({"my", "is"});
  auto s = MakeSentence("My name is Ann Lee", {"ann lee"}, lex);
  EXPECT_EQ(s.length(), 5u);
  EXPECT_EQ(s.stopword_mask, (std::vector<bool>{true, false, true, false, false}));
  EXPECT_THROW(MakeSentence("hello", {"bob"}, lex), InvalidArgument);
  EXPECT_THROW(MakeSentence("  ", {}, lex), InvalidArgument);
}

TEST(LoadCorpusTest, ReadsRecordsAndReportsLine) {
  TempDir dir("load");
  WriteFile(dir / "ok.jsonl",
            "{\"text\": \"hi ann lee\", \"entities\": [\"ann lee\"]}\n"
            "\n"
            "{\"text\": \"bye\", \"context\": \"earlier turn\"}\n");
  StopwordLexicon lex;
  auto corpus = LoadCorpus(dir / "ok.jsonl", lex);
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0].entities, std::vector<std::string>{"ann lee"});
  EXPECT_EQ(corpus[1].context.value_or(""), "earlier turn");

  WriteFile(dir / "bad.jsonl", "{\"text\": \"a\"}\n{\"txt\": 1}\n");
  try {
    LoadCorpus(dir / "bad.jsonl", lex);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  WriteFile(dir / "empty.jsonl", "\n\n");
  EXPECT_THROW(LoadCorpus(dir / "empty.jsonl", lex), EmptyCorpusError);
}

TEST(VocabularyTest, FrequencyOrderWithSpecialsFirst) {
  StopwordLexicon lex;
  std::vector<AnnotatedSentence> c{MakeSentence("b a a", {}, lex),
                                   MakeSentence("c b a", {}, lex)};
  auto v = Vocabulary::Build(c, 5);
  ASSERT_EQ(v.size(), 5u);
  EXPECT_EQ(v.Token(0), "<pad>");
  EXPECT_EQ(v.Token(1), "<eos>");
  EXPECT_EQ(v.Token(2), "<unk>");
  EXPECT_EQ(v.Token(3), "a");
  EXPECT_EQ(v.Token(4), "b");
  EXPECT_EQ(v.Lookup("c"), Vocabulary::kUnkId);
  EXPECT_EQ(v.Lookup("<eos>"), Vocabulary::kUnkId);
  EXPECT_EQ(v.Tokenize("A b z"), (std::vector<TokenId>{3, 4, 2}));
  EXPECT_EQ(v.Detokenize(std::vector<TokenId>{4, 3}), "b a");
  EXPECT_THROW(Vocabulary::Build(c, 3), InvalidArgument);
}

TEST(VocabularyTest, HashTracksContents) {
  auto a = Vocabulary::FromContentTokens({"x", "y"});
  auto b = Vocabulary::FromContentTokens({"x", "y"});
  auto c = Vocabulary::FromContentTokens({"y", "x"});
  EXPECT_EQ(a.Hash(), b.Hash());
  EXPECT_NE(a.Hash(), c.Hash());
  EXPECT_THROW(Vocabulary::FromContentTokens({"x", "x"}), InvalidArgument);
}

TEST(SplitTest, PartitionsDeterministically) {
  auto c = testing::MakeSmallCorpus(101, 5);
  auto s1 = SplitCorpus(c.sentences, {0.8, 0.1, 0.1}, 9);
  auto s2 = SplitCorpus(c.sentences, {0.8, 0.1, 0.1}, 9);
  EXPECT_EQ(s1.train_index, s2.train_index);
  EXPECT_EQ(s1.train.size(), 81u);
  EXPECT_EQ(s1.dev.size(), 10u);
  EXPECT_EQ(s1.test.size(), 10u);
  std::set<std::size_t> all;
  for (auto* idx : {&s1.train_index, &s1.dev_index, &s1.test_index}) {
    all.insert(idx->begin(), idx->end());
  }
  EXPECT_EQ(all.size(), 101u);
  for (std::size_t i = 0; i < s1.test.size(); ++i) {
    EXPECT_EQ(s1.test[i].text, c.sentences[s1.test_index[i]].text);
  }
  auto s3 = SplitCorpus(c.sentences, {0.8, 0.1, 0.1}, 10);
  EXPECT_NE(s1.train_index, s3.train_index);
  EXPECT_THROW(SplitCorpus(c.sentences, {0.5, 0.1, 0.1}, 1), InvalidArgument);
  EXPECT_THROW(SplitCorpus(c.sentences, {1.2, -0.1, -0.1}, 1), InvalidArgument);
}

TEST(CorpusHashTest, DependsOnTextAndOrder) {
  StopwordLexicon lex;
  std::vector<AnnotatedSentence> a{MakeSentence("x y", {}, lex), MakeSentence("z", {}, lex)};
  std::vector<AnnotatedSentence> b{a[1], a[0]};
  EXPECT_NE(CorpusHash(a), CorpusHash(b));
  EXPECT_EQ(CorpusHash(a), CorpusHash(std::vector<AnnotatedSentence>(a)));
}

}  // namespace
}  // namespace invlab
