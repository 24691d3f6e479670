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

// Multi-label classification baseline: one affine layer from the victim
// embedding to the vocabulary, sigmoid per token, binary cross-entropy on
// the bag-of-words presence vector.

#ifndef INVLAB_MLC_H_
#define INVLAB_MLC_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "invlab/corpus.h"
#include "invlab/nn/layers.h"
#include "invlab/nn/scaler.h"
#include "invlab/nn/trainer.h"
#include "invlab/victim.h"

namespace invlab {

struct MlcConfig {
  int vocab_size = 0;
  int embed_dim = 0;
  std::uint64_t init_seed = 0;
};

template <typename T>
class MlcAttacker {
 public:
  using Matrix = nn::Matrix<T>;

  explicit MlcAttacker(const MlcConfig& config);

  const MlcConfig& config() const { return config_; }
  nn::ParameterRefs<T> Parameters();
  nn::ParameterRefs<T> Tensors();
  nn::EmbeddingScaler<T>& scaler() { return scaler_; }
  nn::Linear<T>& layer() { return layer_; }

  // Sigmoid scores, one row per embedding. Special-token columns are
  // computed but never predicted.
  Matrix Scores(std::span<const std::vector<float>> embeddings) const;

  // Mean BCE over (sentence, content token) cells against presence
  // targets built from each sentence's token ids.
  double Loss(std::span<const std::vector<float>> embeddings,
              std::span<const std::vector<TokenId>> tokens) const;
  double LossAndBackward(std::span<const std::vector<float>> embeddings,
                         std::span<const std::vector<TokenId>> tokens);

  double threshold() const { return threshold_; }
  void set_threshold(double t) { threshold_ = t; }

 private:
  Matrix PresenceTargets(std::span<const std::vector<TokenId>> tokens) const;

  MlcConfig config_;
  nn::EmbeddingScaler<T> scaler_;
  nn::Linear<T> layer_;
  double threshold_ = 0.5;
};

template <typename T>
nn::FitResult TrainMlc(MlcAttacker<T>& attacker,
                       std::span<const SentenceEmbedding> train_embeddings,
                       std::span<const AnnotatedSentence> train_sentences,
                       std::span<const SentenceEmbedding> dev_embeddings,
                       std::span<const AnnotatedSentence> dev_sentences,
                       const nn::TrainOptions& options,
                       const std::function<void(const nn::EpochRecord&)>&
                           on_epoch = {});

// Content tokens whose score is >= threshold, ascending id order.
template <typename T>
std::vector<TokenId> PredictMlc(const MlcAttacker<T>& attacker,
                                std::span<const float> embedding,
                                double threshold);

struct SweepPoint {
  double threshold = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  // Threshold with the highest F1; the lowest such threshold on ties.
  double best_threshold = 0;
  double best_f1 = 0;
};

// Evaluates t = 0, interval, ..., 1 with set-mode micro P/R/F1 against the
// distinct content tokens of each reference. `interval` must divide 1.
template <typename T>
SweepResult SweepThresholds(const MlcAttacker<T>& attacker,
                            std::span<const SentenceEmbedding> embeddings,
                            std::span<const AnnotatedSentence> references,
                            double interval = 0.05);

}  // namespace invlab

#endif  // INVLAB_MLC_H_
