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

#include "invlab/geia.h"

#include <gtest/gtest.h>

#include <cmath>

#include "invlab/error.h"
#include "oracles/gradcheck.h"
#include "test_util.h"

namespace invlab {
namespace {

using testing::RandomVector;

GeiaConfig SmallConfig() {
  GeiaConfig c;
  c.vocab_size = 12;
  c.embed_dim = 6;
  c.width = 8;
  c.layers = 1;
  c.heads = 2;
  c.max_positions = 10;
  c.init_seed = 5;
  return c;
}

// Random embeddings and token sequences of mixed length.
struct RandomBatch {
  std::vector<std::vector<float>> embeddings;
  std::vector<std::vector<TokenId>> tokens;
  TrainingBatch batch;
};

RandomBatch MakeBatch(const GeiaConfig& c, int n, std::uint64_t seed) {
  Rng rng(seed);
  RandomBatch r;
  for (int i = 0; i < n; ++i) {
    r.embeddings.push_back(RandomVector(rng, c.embed_dim));
    std::vector<TokenId> t(1 + rng.Below(5));
    for (auto& id : t) id = static_cast<TokenId>(3 + rng.Below(c.vocab_size - 3));
    r.tokens.push_back(t);
  }
  r.batch = BuildTrainingBatch(std::span<const std::vector<float>>(r.embeddings),
                               std::span<const std::vector<TokenId>>(r.tokens));
  return r;
}

TEST(TrainingBatchTest, ShiftsTargetsAndAppendsEos) {
  std::vector<std::vector<float>> e{{1, 2}, {3, 4}};
  std::vector<std::vector<TokenId>> t{{5, 6, 7}, {8}};
  auto b = BuildTrainingBatch(std::span<const std::vector<float>>(e),
                              std::span<const std::vector<TokenId>>(t));
  EXPECT_EQ(b.batch, 2);
  EXPECT_EQ(b.max_len, 4);
  EXPECT_EQ(b.lengths, (std::vector<int>{4, 2}));
  // Row 0: inputs [emb, 5, 6, 7], targets [5, 6, 7, eos].
  EXPECT_EQ(b.targets[0], 5);
  EXPECT_EQ(b.targets[3], Vocabulary::kEosId);
  EXPECT_EQ(b.inputs[1], 5);
  EXPECT_EQ(b.targets[4], 8);
  EXPECT_EQ(b.targets[5], Vocabulary::kEosId);
  EXPECT_EQ(b.mask[6], 0);
  EXPECT_EQ(b.valid_positions(), 6u);
}

TEST(GeiaTest, ZeroHeadLossIsLogVocab) {
  auto c = SmallConfig();
  c.zero_init_head = true;
  GeiaAttacker<double> d(c);
  GeiaAttacker<float> f(c);
  for (std::uint64_t seed : {1, 2, 3}) {
    auto r = MakeBatch(c, 4, seed);
    EXPECT_NEAR(d.Loss(r.batch), std::log(12.0), 1e-12);
    EXPECT_NEAR(f.Loss(r.batch), std::log(12.0), 1e-6);
  }
}

TEST(GeiaTest, GradientsMatchFiniteDifferences) {
  auto c = SmallConfig();
  GeiaAttacker<double> a(c);
  auto r = MakeBatch(c, 3, 11);
  auto params = a.Parameters();
  nn::ZeroGrads(params);
  const double loss = a.LossAndBackward(r.batch);
  EXPECT_NEAR(loss, a.Loss(r.batch), 1e-12);
  for (const auto& g : oracle::CheckGradients(params, [&] { return a.Loss(r.batch); })) {
    EXPECT_LT(g.relative_error, 1e-4) << g.name;
  }
}

TEST(GeiaTest, GradientsAccumulate) {
  auto c = SmallConfig();
  GeiaAttacker<double> a(c);
  auto r = MakeBatch(c, 2, 4);
  auto params = a.Parameters();
  nn::ZeroGrads(params);
  a.LossAndBackward(r.batch);
  const auto once = params.back()->grad;
  a.LossAndBackward(r.batch);
  EXPECT_TRUE(params.back()->grad.isApprox(2 * once));
}

TEST(GeiaTest, CausalLogits) {
  auto c = SmallConfig();
  GeiaAttacker<double> a(c);
  std::vector<std::vector<float>> e{std::vector<float>(6, 0.3f)};
  std::vector<std::vector<TokenId>> t1{{4, 5, 6, 7}}, t2{{4, 5, 6, 9}};
  auto b1 = BuildTrainingBatch(std::span<const std::vector<float>>(e),
                               std::span<const std::vector<TokenId>>(t1));
  auto b2 = BuildTrainingBatch(std::span<const std::vector<float>>(e),
                               std::span<const std::vector<TokenId>>(t2));
  const auto l1 = a.Logits(b1), l2 = a.Logits(b2);
  // The differing input sits at position 4; rows 0..3 must not see it.
  for (int row = 0; row < 4; ++row) {
    EXPECT_EQ((l1.row(row) - l2.row(row)).cwiseAbs().maxCoeff(), 0.0) << row;
  }
  EXPECT_GT((l1.row(4) - l2.row(4)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(GeiaTest, EmbeddingConditionsEveryPosition) {
  auto c = SmallConfig();
  GeiaAttacker<double> a(c);
  std::vector<std::vector<float>> e1{std::vector<float>(6, 0.3f)};
  std::vector<std::vector<float>> e2{std::vector<float>(6, -0.3f)};
  std::vector<std::vector<TokenId>> t{{4, 5, 6}};
  auto l1 = a.Logits(BuildTrainingBatch(std::span<const std::vector<float>>(e1),
                                        std::span<const std::vector<TokenId>>(t)));
  auto l2 = a.Logits(BuildTrainingBatch(std::span<const std::vector<float>>(e2),
                                        std::span<const std::vector<TokenId>>(t)));
  for (int row = 0; row < 4; ++row) {
    EXPECT_GT((l1.row(row) - l2.row(row)).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(GeiaTest, RejectsBadInputs) {
  auto c = SmallConfig();
  GeiaAttacker<double> a(c);
  std::vector<std::vector<float>> e{std::vector<float>(5, 0.0f)};
  std::vector<std::vector<TokenId>> t{{4}};
  EXPECT_THROW(a.Loss(BuildTrainingBatch(std::span<const std::vector<float>>(e),
                                         std::span<const std::vector<TokenId>>(t))),
               InvalidArgument);
  auto bad = c;
  bad.heads = 3;
  EXPECT_THROW(GeiaAttacker<double>{bad}, InvalidArgument);
}

// Sum of next-token log-probabilities along the decoded path.
double Rescore(const GeiaAttacker<float>& a, std::span<const float> e,
               const DecodedSequence& d) {
  double total = 0;
  std::vector<std::vector<TokenId>> prefix(1);
  for (TokenId t : d.tokens) {
    total += a.NextTokenLogProbs(e, prefix)(0, t);
    prefix[0].push_back(t);
  }
  if (d.finished) total += a.NextTokenLogProbs(e, prefix)(0, Vocabulary::kEosId);
  return total;
}

class DecodeTest : public ::testing::Test {
 protected:
  void SetUp() override {
    cfg_ = SmallConfig();
    cfg_.max_positions = 16;
    attacker_ = std::make_unique<GeiaAttacker<float>>(cfg_);
    // Scale the head so the distribution is peaked and EOS actually occurs.
    attacker_->output_head().weight.value *= 40.0f;
    attacker_->output_head().bias.value(0, Vocabulary::kEosId) = 1.5f;
  }
  GeiaConfig cfg_;
  std::unique_ptr<GeiaAttacker<float>> attacker_;
};

TEST_F(DecodeTest, BeamOneEqualsGreedy) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto e = RandomVector(rng, cfg_.embed_dim);
    const auto g = DecodeGreedy(*attacker_, e, 12);
    const auto b = DecodeBeam(*attacker_, e, 1, 12);
    EXPECT_EQ(g.tokens, b.tokens);
    EXPECT_EQ(g.finished, b.finished);
  }
}

TEST_F(DecodeTest, ScoresAreSequenceLogProbs) {
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto e = RandomVector(rng, cfg_.embed_dim);
    for (const auto& d : {DecodeGreedy(*attacker_, e, 12), DecodeBeam(*attacker_, e, 4, 12)}) {
      EXPECT_NEAR(d.log_prob, Rescore(*attacker_, e, d), 1e-4);
    }
  }
}

TEST_F(DecodeTest, WiderBeamUsuallyScoresHigher) {
  // Not guaranteed for pruned search, so only checked in aggregate.
  Rng rng(6);
  int better_or_equal = 0;
  for (int i = 0; i < 50; ++i) {
    const auto e = RandomVector(rng, cfg_.embed_dim);
    const auto g = DecodeBeam(*attacker_, e, 1, 12);
    const auto b = DecodeBeam(*attacker_, e, 5, 12);
    better_or_equal += b.log_prob >= g.log_prob - 1e-9;
  }
  EXPECT_GE(better_or_equal, 45);
}

TEST_F(DecodeTest, NucleusIsSeededAndBounded) {
  Rng rng(5);
  int differ = 0;
  for (int i = 0; i < 30; ++i) {
    const auto e = RandomVector(rng, cfg_.embed_dim);
    NucleusOptions o{0.9, 0.9, 42};
    const auto a = DecodeNucleus(*attacker_, e, o, 8);
    const auto b = DecodeNucleus(*attacker_, e, o, 8);
    EXPECT_EQ(a.tokens, b.tokens);
    EXPECT_EQ(a.log_prob, b.log_prob);
    EXPECT_LE(a.tokens.size(), 8u);
    o.seed = 43;
    differ += DecodeNucleus(*attacker_, e, o, 8).tokens != a.tokens;
  }
  EXPECT_GT(differ, 0);
}

TEST_F(DecodeTest, TinyNucleusIsGreedy) {
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto e = RandomVector(rng, cfg_.embed_dim);
    EXPECT_EQ(DecodeNucleus(*attacker_, e, {1e-9, 0.7, 1}, 12).tokens,
              DecodeGreedy(*attacker_, e, 12).tokens);
  }
}

TEST_F(DecodeTest, RespectsMaxLen) {
  Rng rng(9);
  for (int len : {1, 3, 40}) {
    const auto e = RandomVector(rng, cfg_.embed_dim);
    EXPECT_LE(DecodeGreedy(*attacker_, e, len).tokens.size(), static_cast<std::size_t>(len));
    EXPECT_LE(DecodeBeam(*attacker_, e, 3, len).tokens.size(), static_cast<std::size_t>(len));
    // Never beyond the positional table either.
    EXPECT_LT(DecodeBeam(*attacker_, e, 3, len).tokens.size(),
              static_cast<std::size_t>(cfg_.max_positions));
  }
  EXPECT_THROW(DecodeBeam(*attacker_, RandomVector(rng, cfg_.embed_dim), 0, 5), InvalidArgument);
  EXPECT_THROW(DecodeNucleus(*attacker_, RandomVector(rng, cfg_.embed_dim), {0.0, 1.0, 0}, 5),
               InvalidArgument);
}

TEST(GeiaTrainTest, FitsTinyCorpus) {
  auto corpus = testing::MakeSmallCorpus(16, 2, 4);
  testing::HashVictim victim(8);
  auto emb = victim.EmbedBatch(corpus.sentences);
  GeiaConfig c;
  c.vocab_size = static_cast<int>(corpus.vocab->size());
  c.embed_dim = 8;
  c.width = 32;
  c.layers = 1;
  c.heads = 2;
  c.max_positions = 32;
  GeiaAttacker<float> a(c);
  nn::TrainOptions opts;
  opts.adam.learning_rate = 3e-3;
  opts.batch_size = 4;
  opts.epochs = 60;
  auto fit = TrainGeia<float>(a, emb, corpus.sentences, {}, {}, opts);
  ASSERT_EQ(fit.log.size(), 60u);
  EXPECT_LT(fit.best_loss, 0.5 * fit.log.front().train_loss);
  // Best-epoch parameters are restored.
  EXPECT_NEAR(EvaluateGeia(a, emb, corpus.sentences), fit.best_loss, 0.2);
}

}  // namespace
}  // namespace invlab
