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

// MLC and MSP attackers.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "invlab/error.h"
#include "invlab/mlc.h"
#include "invlab/msp.h"
#include "oracles/gradcheck.h"
#include "oracles/oracles.h"
#include "test_util.h"

namespace invlab {
namespace {

using testing::RandomVector;

struct Data {
  std::vector<std::vector<float>> embeddings;
  std::vector<std::vector<TokenId>> tokens;
};

Data RandomData(int n, int dim, int vocab, std::uint64_t seed) {
  Rng rng(seed);
  Data d;
  for (int i = 0; i < n; ++i) {
    d.embeddings.push_back(RandomVector(rng, dim));
    std::vector<TokenId> t(1 + rng.Below(6));
    // Includes specials and repeats on purpose.
    for (auto& id : t) id = static_cast<TokenId>(rng.Below(vocab));
    d.tokens.push_back(t);
  }
  return d;
}

double Sigmoid(double z) { return 1 / (1 + std::exp(-z)); }

TEST(MlcTest, LossIsMeanBceOverContentCells) {
  MlcAttacker<double> a({10, 4, 3});
  auto d = RandomData(5, 4, 10, 1);
  const auto scores = a.Scores(d.embeddings);
  double total = 0;
  for (int r = 0; r < 5; ++r) {
    for (int c = 3; c < 10; ++c) {
      const bool present = std::count(d.tokens[r].begin(), d.tokens[r].end(), c) > 0;
      total -= present ? std::log(scores(r, c)) : std::log(1 - scores(r, c));
    }
  }
  EXPECT_NEAR(a.Loss(d.embeddings, d.tokens), total / (5 * 7), 1e-12);
}

TEST(MlcTest, GradientsMatchFiniteDifferences) {
  MlcAttacker<double> a({10, 4, 3});
  auto d = RandomData(5, 4, 10, 2);
  auto params = a.Parameters();
  nn::ZeroGrads(params);
  a.LossAndBackward(d.embeddings, d.tokens);
  for (const auto& g : oracle::CheckGradients(params, [&] { return a.Loss(d.embeddings, d.tokens); })) {
    EXPECT_LT(g.relative_error, 1e-6) << g.name;
  }
}

TEST(MlcTest, PredictionIsThresholdedContentSet) {
  MlcAttacker<double> a({10, 4, 7});
  Rng rng(3);
  const auto e = RandomVector(rng, 4);
  std::vector<std::vector<float>> row{e};
  const auto scores = a.Scores(row);
  for (double t : {0.0, 0.3, 0.5, 0.7, 1.0}) {
    std::vector<TokenId> want;
    for (int c = 3; c < 10; ++c) {
      if (scores(0, c) >= t) want.push_back(c);
    }
    EXPECT_EQ(PredictMlc(a, e, t), want) << t;
  }
  EXPECT_EQ(PredictMlc(a, e, 0.0).size(), 7u);
}

TEST(MlcTest, SweepIsNestedAndMatchesOracle) {
  auto corpus = testing::MakeSmallCorpus(40, 4);
  testing::HashVictim victim(8);
  auto emb = victim.EmbedBatch(corpus.sentences);
  MlcAttacker<double> a({static_cast<int>(corpus.vocab->size()), 8, 1});
  nn::TrainOptions opts;
  opts.adam.learning_rate = 1e-2;
  opts.epochs = 5;
  opts.batch_size = 8;
  TrainMlc<double>(a, emb, corpus.sentences, {}, {}, opts);

  const auto sweep = SweepThresholds<double>(a, emb, corpus.sentences, 0.05);
  ASSERT_EQ(sweep.points.size(), 21u);
  EXPECT_EQ(sweep.points.front().threshold, 0.0);
  EXPECT_EQ(sweep.points.back().threshold, 1.0);
  double best = -1;
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const auto& p = sweep.points[i];
    if (i > 0) EXPECT_LE(p.recall, sweep.points[i - 1].recall);
    best = std::max(best, p.f1);
    // Oracle: rebuild predictions with PredictMlc and score by brute force.
    std::vector<oracle::Seq> preds, refs;
    for (std::size_t s = 0; s < emb.size(); ++s) {
      preds.push_back(PredictMlc(a, emb[s].values, p.threshold));
      oracle::Seq r;
      for (auto t : corpus.sentences[s].token_ids) {
        if (t >= 3) r.push_back(t);
      }
      refs.push_back(r);
    }
    const auto want = oracle::MicroPrf(preds, refs, true);
    EXPECT_NEAR(p.precision, want.precision, 1e-12);
    EXPECT_NEAR(p.recall, want.recall, 1e-12);
  }
  EXPECT_EQ(sweep.best_f1, best);
  EXPECT_THROW(SweepThresholds<double>(a, emb, corpus.sentences, 0.3), InvalidArgument);
}

// Independent replay of the MSP objective from the step logits.
double MspOracleLoss(const std::vector<nn::Matrix<double>>& steps,
                     const std::vector<std::vector<TokenId>>& tokens,
                     std::vector<std::vector<TokenId>>* emitted) {
  double total = 0;
  const std::size_t batch = tokens.size();
  emitted->assign(batch, {});
  for (std::size_t b = 0; b < batch; ++b) {
    std::set<TokenId> remaining;
    for (auto t : tokens[b]) {
      if (t >= 3) remaining.insert(t);
    }
    for (const auto& logits : steps) {
      if (remaining.empty()) break;
      double z_all = 0, z_rem = 0;
      for (Eigen::Index v = 0; v < logits.cols(); ++v) z_all += std::exp(logits(b, v));
      TokenId best = -1;
      for (auto t : remaining) {
        z_rem += std::exp(logits(b, t));
        if (best < 0 || logits(b, t) > logits(b, best)) best = t;
      }
      total += -std::log(z_rem / z_all);
      remaining.erase(best);
      (*emitted)[b].push_back(best);
    }
  }
  return total / static_cast<double>(batch);
}

TEST(MspTest, LossMatchesOracle) {
  MspAttacker<double> a({12, 4, 6, 3, 9});
  auto d = RandomData(6, 4, 12, 4);
  std::vector<std::vector<TokenId>> emitted;
  const double want = MspOracleLoss(a.StepLogits(d.embeddings), d.tokens, &emitted);
  EXPECT_NEAR(a.Loss(d.embeddings, d.tokens), want, 1e-10);
  // Per-step losses sum to the sentence loss; steps past the label set are 0.
  const auto steps = a.StepLosses(d.embeddings[0], d.tokens[0]);
  ASSERT_EQ(steps.size(), 3u);
  std::vector<std::vector<TokenId>> one{d.tokens[0]};
  std::vector<std::vector<float>> one_e{d.embeddings[0]};
  double sum = 0;
  for (double s : steps) sum += s;
  EXPECT_NEAR(sum, a.Loss(one_e, one), 1e-10);
}

TEST(MspTest, GradientsMatchFiniteDifferences) {
  MspAttacker<double> a({12, 4, 6, 4, 10});
  auto d = RandomData(5, 4, 12, 6);
  auto params = a.Parameters();
  nn::ZeroGrads(params);
  const double loss = a.LossAndBackward(d.embeddings, d.tokens);
  EXPECT_NEAR(loss, a.Loss(d.embeddings, d.tokens), 1e-12);
  for (const auto& g : oracle::CheckGradients(params, [&] { return a.Loss(d.embeddings, d.tokens); })) {
    EXPECT_LT(g.relative_error, 1e-5) << g.name;
  }
}

TEST(MspTest, PredictionEmitsDistinctContentTokens) {
  MspAttacker<double> a({12, 4, 6, 5, 11});
  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    const auto e = RandomVector(rng, 4);
    const auto ordered = PredictMspOrdered(a, e);
    EXPECT_EQ(ordered.size(), 5u);
    std::set<TokenId> uniq(ordered.begin(), ordered.end());
    EXPECT_EQ(uniq.size(), ordered.size());
    for (auto t : ordered) EXPECT_GE(t, 3);
    auto sorted = ordered;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(PredictMsp(a, e), sorted);
  }
}

TEST(MspTest, RejectsBadConfig) {
  EXPECT_THROW(MspAttacker<double>({3, 4, 6, 5, 0}), InvalidArgument);
  EXPECT_THROW(MspAttacker<double>({12, 4, 6, 0, 0}), InvalidArgument);
  MspAttacker<double> a({12, 4, 6, 2, 0});
  std::vector<std::vector<float>> e{std::vector<float>(3, 0.f)};
  std::vector<std::vector<TokenId>> t{{4}};
  EXPECT_THROW(a.Loss(e, t), InvalidArgument);
}

TEST(MspTest, TrainingReducesLoss) {
  auto corpus = testing::MakeSmallCorpus(40, 8);
  testing::HashVictim victim(8);
  auto emb = victim.EmbedBatch(corpus.sentences);
  MspAttacker<float> a({static_cast<int>(corpus.vocab->size()), 8, 32, 10, 2});
  nn::TrainOptions opts;
  opts.adam.learning_rate = 1e-2;
  opts.epochs = 20;
  opts.batch_size = 8;
  auto fit = TrainMsp<float>(a, emb, corpus.sentences, {}, {}, opts);
  EXPECT_LT(fit.best_loss, 0.7 * fit.log.front().train_loss);
}

}  // namespace
}  // namespace invlab
