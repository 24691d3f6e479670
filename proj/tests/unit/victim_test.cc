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

#include "invlab/victim.h"

#include <gtest/gtest.h>

#include <atomic>
#include <functional>
#include <thread>

#include "invlab/error.h"
#include "test_util.h"

// httplib after the Eigen-using headers; see core/src/victim.cc.
#include "httplib.h"
#include "json.hpp"

namespace invlab {
namespace {

using testing::MakeSmallCorpus;
using testing::TempDir;

TEST(ToyVictimTest, DeterministicPerSeed) {
  auto c = MakeSmallCorpus(20, 1);
  for (auto kind : {ToyVictimKind::kBagOfEmbeddings, ToyVictimKind::kTinyTransformer}) {
    auto a = MakeToyVictim(kind, 16, 3, *c.vocab);
    auto b = MakeToyVictim(kind, 16, 3, *c.vocab);
    auto d = MakeToyVictim(kind, 16, 4, *c.vocab);
    EXPECT_EQ(a->id(), b->id());
    EXPECT_NE(a->id(), d->id());
    EXPECT_EQ(a->dim(), 16);
    const auto ea = a->Embed(c.sentences[0]);
    EXPECT_EQ(ea.values, b->Embed(c.sentences[0]).values);
    EXPECT_NE(ea.values, d->Embed(c.sentences[0]).values);
    EXPECT_EQ(ea.dim(), 16u);
    EXPECT_EQ(ea.victim_id, a->id());
  }
}

TEST(ToyVictimTest, BagIgnoresOrderTransformerDoesNot) {
  auto vocab = Vocabulary::FromContentTokens({"alpha", "beta", "gamma"});
  StopwordLexicon lex;
  auto s1 = MakeSentence("alpha beta gamma", {}, lex);
  auto s2 = MakeSentence("gamma beta alpha", {}, lex);
  std::vector<AnnotatedSentence> both{s1, s2};
  EncodeCorpus(vocab, both);
  auto bag = MakeToyVictim(ToyVictimKind::kBagOfEmbeddings, 8, 1, vocab);
  auto tt = MakeToyVictim(ToyVictimKind::kTinyTransformer, 8, 1, vocab);
  const auto b1 = bag->Embed(both[0]).values, b2 = bag->Embed(both[1]).values;
  for (std::size_t i = 0; i < b1.size(); ++i) EXPECT_NEAR(b1[i], b2[i], 1e-6);
  EXPECT_NE(tt->Embed(both[0]).values, tt->Embed(both[1]).values);
}

TEST(ToyVictimTest, RejectsForeignTokens) {
  auto vocab = Vocabulary::FromContentTokens({"a"});
  auto v = MakeToyVictim(ToyVictimKind::kBagOfEmbeddings, 4, 1, vocab);
  AnnotatedSentence s;
  s.token_ids = {99};
  EXPECT_THROW(v->Embed(s), InvalidArgument);
  EXPECT_THROW(ParseToyVictimKind("lstm"), InvalidArgument);
  EXPECT_EQ(ParseToyVictimKind("tiny-transformer"), ToyVictimKind::kTinyTransformer);
}

TEST(EmbeddingCacheTest, WarmCacheIssuesNoQueries) {
  auto c = MakeSmallCorpus(30, 2);
  TempDir dir("cache");
  auto toy = MakeToyVictim(ToyVictimKind::kBagOfEmbeddings, 8, 1, *c.vocab);
  CountingVictim cold(*toy);
  auto first = EmbedCorpusCached(cold, c.sentences, dir / "e.f32");
  EXPECT_EQ(cold.queries(), 30u);
  CountingVictim warm(*toy);
  auto second = EmbedCorpusCached(warm, c.sentences, dir / "e.f32");
  EXPECT_EQ(warm.queries(), 0u);
  ASSERT_EQ(first.size(), second.size());
  for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(first[i].values, second[i].values);
}

TEST(EmbeddingCacheTest, StaleCacheIsRejected) {
  auto c = MakeSmallCorpus(30, 2);
  TempDir dir("stale");
  auto toy = MakeToyVictim(ToyVictimKind::kBagOfEmbeddings, 8, 1, *c.vocab);
  EmbedCorpusCached(*toy, c.sentences, dir / "e.f32");
  auto other = MakeToyVictim(ToyVictimKind::kBagOfEmbeddings, 8, 2, *c.vocab);
  EXPECT_THROW(EmbedCorpusCached(*other, c.sentences, dir / "e.f32"), StaleCacheError);
  std::vector<AnnotatedSentence> fewer(c.sentences.begin(), c.sentences.begin() + 10);
  EXPECT_THROW(EmbedCorpusCached(*toy, fewer, dir / "e.f32"), StaleCacheError);
  // Truncated data file.
  testing::WriteFile(dir / "e.f32", "xx");
  EXPECT_THROW(EmbedCorpusCached(*toy, c.sentences, dir / "e.f32"), StaleCacheError);
}

// Local embedding provider: answers each text with `dim` values derived from
// its length, or misbehaves on request.
class FakeProvider {
 public:
  using Handler = std::function<void(const nlohmann::json&, httplib::Response&)>;

  explicit FakeProvider(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      handler_(nlohmann::json::parse(req.body), res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeProvider() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/embed"; }
  int requests() const { return requests_.load(); }

  static Handler Reply(int dim) {
    return [dim](const nlohmann::json& body, httplib::Response& res) {
      nlohmann::json out;
      out["embeddings"] = nlohmann::json::array();
      for (const auto& t : body["texts"]) {
        std::vector<double> row(dim, static_cast<double>(t.get<std::string>().size()));
        out["embeddings"].push_back(row);
      }
      res.set_content(out.dump(), "application/json");
    };
  }

 private:
  Handler handler_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
};

std::vector<AnnotatedSentence> Texts(std::initializer_list<const char*> texts) {
  StopwordLexicon lex;
  std::vector<AnnotatedSentence> out;
  for (const char* t : texts) out.push_back(MakeSentence(t, {}, lex));
  return out;
}

TEST(RemoteVictimTest, EmbedsInBatches) {
  FakeProvider provider(FakeProvider::Reply(4));
  RemoteVictimOptions opts;
  opts.url = provider.url();
  opts.dim = 4;
  opts.batch_size = 2;
  auto victim = MakeRemoteVictim(opts);
  auto out = victim->EmbedBatch(Texts({"a", "bb", "ccc"}));
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[2].values, std::vector<float>(4, 3.0f));
  EXPECT_EQ(provider.requests(), 2);
}

TEST(RemoteVictimTest, WrongDimensionIsProtocolError) {
  FakeProvider provider(FakeProvider::Reply(5));
  RemoteVictimOptions opts;
  opts.url = provider.url();
  opts.dim = 4;
  auto victim = MakeRemoteVictim(opts);
  EXPECT_THROW(victim->EmbedBatch(Texts({"a"})), ProtocolError);
}

TEST(RemoteVictimTest, MalformedRepliesAreProtocolErrors) {
  for (std::string body : {"not json", "{}", "{\"embeddings\": [[1, \"x\"]]}",
                           "{\"embeddings\": [[1, 2], [3, 4]]}"}) {
    FakeProvider provider([body](const nlohmann::json&, httplib::Response& res) {
      res.set_content(body, "application/json");
    });
    RemoteVictimOptions opts;
    opts.url = provider.url();
    opts.dim = 2;
    auto victim = MakeRemoteVictim(opts);
    EXPECT_THROW(victim->EmbedBatch(Texts({"a"})), ProtocolError) << body;
  }
}

TEST(RemoteVictimTest, RetriesServerErrorsOnly) {
  std::atomic<int> calls{0};
  auto reply = FakeProvider::Reply(2);
  FakeProvider flaky([&](const nlohmann::json& body, httplib::Response& res) {
    if (calls++ == 0) {
      res.status = 503;
      return;
    }
    reply(body, res);
  });
  RemoteVictimOptions opts;
  opts.url = flaky.url();
  opts.dim = 2;
  opts.retries = 1;
  EXPECT_EQ(MakeRemoteVictim(opts)->EmbedBatch(Texts({"ab"})).size(), 1u);
  EXPECT_EQ(calls.load(), 2);

  FakeProvider refusing([](const nlohmann::json&, httplib::Response& res) { res.status = 400; });
  opts.url = refusing.url();
  EXPECT_THROW(MakeRemoteVictim(opts)->EmbedBatch(Texts({"ab"})), ProtocolError);
  EXPECT_EQ(refusing.requests(), 1);
}

TEST(RemoteVictimTest, UnreachableAfterRetries) {
  RemoteVictimOptions opts;
  opts.url = "http://127.0.0.1:1/embed";
  opts.dim = 2;
  opts.retries = 1;
  opts.timeout_ms = 200;
  try {
    MakeRemoteVictim(opts)->EmbedBatch(Texts({"a"}));
    FAIL() << "expected an error";
  } catch (const ProtocolError&) {
    FAIL() << "transport failures are not protocol errors";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("2 attempts"), std::string::npos);
  }
}

TEST(RemoteVictimTest, ValidatesOptions) {
  RemoteVictimOptions opts;
  opts.url = "localhost/embed";
  opts.dim = 2;
  EXPECT_THROW(MakeRemoteVictim(opts), InvalidArgument);
  opts.url = "http://localhost/embed";
  opts.dim = 0;
  EXPECT_THROW(MakeRemoteVictim(opts), InvalidArgument);
}

}  // namespace
}  // namespace invlab
