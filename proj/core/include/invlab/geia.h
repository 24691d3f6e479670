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

// Generative inversion attacker: a causal transformer decoder whose first
// input row is the (aligned) victim embedding, followed by the sentence's
// own token embeddings. Trained by teacher forcing to emit
// [w_0, ..., w_{u-1}, <eos>]; decoded with beam search or nucleus sampling.

#ifndef INVLAB_GEIA_H_
#define INVLAB_GEIA_H_

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "invlab/corpus.h"
#include "invlab/nn/layers.h"
#include "invlab/nn/scaler.h"
#include "invlab/nn/tensor.h"
#include "invlab/nn/trainer.h"
#include "invlab/victim.h"

namespace invlab {

struct GeiaConfig {
  int vocab_size = 0;
  int embed_dim = 0;  // d_v of the victim
  int width = 128;    // d_a
  int layers = 4;
  int heads = 4;
  int max_positions = 64;
  bool zero_init_head = false;
  std::uint64_t init_seed = 0;
};

// Teacher-forcing batch for sentences of lengths u_b. Sequence b has
// length u_b + 1; slot 0 of `inputs` is the embedding slot (holds <pad>),
// slot t >= 1 holds w_{t-1}. Targets are w_0..w_{u-1}, <eos>; padding
// slots hold <pad> with mask 0.
struct TrainingBatch {
  int batch = 0;
  int max_len = 0;
  std::vector<std::vector<float>> embeddings;
  std::vector<TokenId> inputs;
  std::vector<TokenId> targets;
  std::vector<std::uint8_t> mask;
  std::vector<int> lengths;

  nn::SequenceLayout layout() const { return {batch, max_len, lengths}; }
  std::size_t valid_positions() const;
};

// Throws InvalidArgument on mismatched list lengths, empty sentences or
// sentences without token ids.
TrainingBatch BuildTrainingBatch(std::span<const SentenceEmbedding> embeddings,
                                 std::span<const AnnotatedSentence> sentences);

// Same layout from raw embedding rows and token sequences. Sequences may be
// empty (decoding prefixes); targets then only hold <eos>.
TrainingBatch BuildTrainingBatch(std::span<const std::vector<float>> embeddings,
                                 std::span<const std::vector<TokenId>> tokens);

template <typename T>
class GeiaAttacker {
 public:
  using Matrix = nn::Matrix<T>;

  explicit GeiaAttacker(const GeiaConfig& config);

  const GeiaConfig& config() const { return config_; }

  // Trainable parameters (optimizer view).
  nn::ParameterRefs<T> Parameters();
  // Trainable parameters plus the input scaler (checkpoint view).
  nn::ParameterRefs<T> Tensors();

  nn::EmbeddingScaler<T>& scaler() { return scaler_; }
  nn::Linear<T>& projection() { return align_; }
  nn::Linear<T>& output_head() { return head_; }

  // The input sequence I before position embeddings are added:
  // row b*max_len holds Align(f(x_b)), row b*max_len + t holds
  // Phi_emb(w_{t-1}). Padding rows are zero.
  Matrix InputRepresentations(const TrainingBatch& batch) const;

  // batch*max_len x |V| logits.
  Matrix Logits(const TrainingBatch& batch) const;

  // Mean cross-entropy over unmasked positions.
  double Loss(const TrainingBatch& batch) const;
  // Summed cross-entropy and the number of positions it covers.
  std::pair<double, std::size_t> LossSum(const TrainingBatch& batch) const;

  // Loss() plus gradient accumulation into Parameters().
  double LossAndBackward(const TrainingBatch& batch);

  // Log-probabilities of the next token after each prefix, one row per
  // prefix. Read-only; safe to call concurrently.
  Matrix NextTokenLogProbs(std::span<const float> embedding,
                           std::span<const std::vector<TokenId>> prefixes) const;

 private:
  struct Tape {
    nn::SequenceLayout layout;
    Matrix embeddings;  // scaled, batch x d_v
    std::vector<typename nn::TransformerBlock<T>::Cache> blocks;
    typename nn::LayerNorm<T>::Cache final_ln;
    Matrix normed;
  };

  Matrix Hidden(const TrainingBatch& batch, Tape* tape) const;

  GeiaConfig config_;
  nn::EmbeddingScaler<T> scaler_;
  nn::Linear<T> align_;
  nn::Parameter<T> token_table_;
  nn::Parameter<T> position_table_;
  std::vector<nn::TransformerBlock<T>> blocks_;
  nn::LayerNorm<T> final_ln_;
  nn::Linear<T> head_;
};

// Fits the input scaler on the training embeddings, then runs the shared
// mini-batch loop. The returned log records train/dev loss per epoch; the
// best-dev-loss parameters are left in `attacker`.
template <typename T>
nn::FitResult TrainGeia(GeiaAttacker<T>& attacker,
                        std::span<const SentenceEmbedding> train_embeddings,
                        std::span<const AnnotatedSentence> train_sentences,
                        std::span<const SentenceEmbedding> dev_embeddings,
                        std::span<const AnnotatedSentence> dev_sentences,
                        const nn::TrainOptions& options,
                        const std::function<void(const nn::EpochRecord&)>&
                            on_epoch = {});

// Held-out teacher-forced loss, exact mean over all positions.
template <typename T>
double EvaluateGeia(const GeiaAttacker<T>& attacker,
                    std::span<const SentenceEmbedding> embeddings,
                    std::span<const AnnotatedSentence> sentences,
                    int batch_size = 64);

struct DecodedSequence {
  std::vector<TokenId> tokens;  // <eos>/<pad> stripped
  double log_prob = 0;          // sum over emitted tokens incl. <eos>
  bool finished = false;        // ended with <eos> rather than max_len
};

// max_len is clamped to max_positions - 1.
template <typename T>
DecodedSequence DecodeGreedy(const GeiaAttacker<T>& attacker,
                             std::span<const float> embedding, int max_len);

// Sum-of-log-probability beam search without length normalization.
template <typename T>
DecodedSequence DecodeBeam(const GeiaAttacker<T>& attacker,
                           std::span<const float> embedding, int beam_size,
                           int max_len);

struct NucleusOptions {
  double top_p = 0.9;
  double temperature = 0.9;
  std::uint64_t seed = 0;
};

template <typename T>
DecodedSequence DecodeNucleus(const GeiaAttacker<T>& attacker,
                              std::span<const float> embedding,
                              const NucleusOptions& options, int max_len);

}  // namespace invlab

#endif  // INVLAB_GEIA_H_
