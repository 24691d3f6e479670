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

// Multi-set prediction baseline: a GRU fed the victim embedding at every
// one of T steps. Step t is trained to put mass on the label tokens not yet
// emitted, loss_t = -log sum_{w in remaining(t)} p_t(w); the emission at
// each step (teacher-forced in training, greedy at inference) is the most
// probable remaining token.

#ifndef INVLAB_MSP_H_
#define INVLAB_MSP_H_

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

struct MspConfig {
  int vocab_size = 0;
  int embed_dim = 0;
  int hidden = 128;
  int steps = 10;
  std::uint64_t init_seed = 0;
};

template <typename T>
class MspAttacker {
 public:
  using Matrix = nn::Matrix<T>;

  explicit MspAttacker(const MspConfig& config);

  const MspConfig& config() const { return config_; }
  nn::ParameterRefs<T> Parameters();
  nn::ParameterRefs<T> Tensors();
  nn::EmbeddingScaler<T>& scaler() { return scaler_; }
  nn::Linear<T>& output_head() { return head_; }

  // Per-step logits, steps x (batch x |V|).
  std::vector<Matrix> StepLogits(std::span<const std::vector<float>> embeddings) const;

  // Loss summed over steps, averaged over the batch. Label sets are the
  // distinct content tokens of each sentence.
  double Loss(std::span<const std::vector<float>> embeddings,
              std::span<const std::vector<TokenId>> tokens) const;
  double LossAndBackward(std::span<const std::vector<float>> embeddings,
                         std::span<const std::vector<TokenId>> tokens);

  // Per-step loss of one sentence (for inspection and tests).
  std::vector<double> StepLosses(std::span<const float> embedding,
                                 std::span<const TokenId> tokens) const;

 private:
  double Run(std::span<const std::vector<float>> embeddings,
             std::span<const std::vector<TokenId>> tokens, bool backward,
             std::vector<std::vector<double>>* step_losses);

  MspConfig config_;
  nn::EmbeddingScaler<T> scaler_;
  nn::Gru<T> cell_;
  nn::Linear<T> head_;
};

template <typename T>
nn::FitResult TrainMsp(MspAttacker<T>& attacker,
                       std::span<const SentenceEmbedding> train_embeddings,
                       std::span<const AnnotatedSentence> train_sentences,
                       std::span<const SentenceEmbedding> dev_embeddings,
                       std::span<const AnnotatedSentence> dev_sentences,
                       const nn::TrainOptions& options,
                       const std::function<void(const nn::EpochRecord&)>&
                           on_epoch = {});

// Runs T steps emitting the most probable content token not yet emitted
// (ties to the lowest id). Returns the emitted tokens in ascending id
// order: at most T, no duplicates, no specials.
template <typename T>
std::vector<TokenId> PredictMsp(const MspAttacker<T>& attacker,
                                std::span<const float> embedding);

// Same, in emission order.
template <typename T>
std::vector<TokenId> PredictMspOrdered(const MspAttacker<T>& attacker,
                                       std::span<const float> embedding);

}  // namespace invlab

#endif  // INVLAB_MSP_H_
