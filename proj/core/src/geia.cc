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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "invlab/error.h"
#include "invlab/rng.h"

namespace invlab {

std::size_t TrainingBatch::valid_positions() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

TrainingBatch BuildTrainingBatch(std::span<const std::vector<float>> embeddings,
                                 std::span<const std::vector<TokenId>> tokens) {
  if (embeddings.size() != tokens.size()) {
    throw InvalidArgument("embedding and sentence lists differ in length");
  }
  TrainingBatch batch;
  batch.batch = static_cast<int>(tokens.size());
  for (const auto& seq : tokens) {
    batch.max_len = std::max(batch.max_len, static_cast<int>(seq.size()) + 1);
  }
  const std::size_t cells =
      static_cast<std::size_t>(batch.batch) * static_cast<std::size_t>(batch.max_len);
  batch.inputs.assign(cells, Vocabulary::kPadId);
  batch.targets.assign(cells, Vocabulary::kPadId);
  batch.mask.assign(cells, 0);
  batch.embeddings.assign(embeddings.begin(), embeddings.end());
  for (int b = 0; b < batch.batch; ++b) {
    const auto& seq = tokens[b];
    const int len = static_cast<int>(seq.size()) + 1;
    batch.lengths.push_back(len);
    const std::size_t base = static_cast<std::size_t>(b) * batch.max_len;
    for (int t = 0; t < len; ++t) {
      if (t >= 1) batch.inputs[base + t] = seq[t - 1];
      const TokenId target =
          t < len - 1 ? seq[t] : Vocabulary::kEosId;
      if (target == Vocabulary::kPadId) {
        throw InvalidArgument("<pad> cannot appear in a target sequence");
      }
      batch.targets[base + t] = target;
      batch.mask[base + t] = 1;
    }
  }
  return batch;
}

TrainingBatch BuildTrainingBatch(std::span<const SentenceEmbedding> embeddings,
                                 std::span<const AnnotatedSentence> sentences) {
  if (embeddings.size() != sentences.size()) {
    throw InvalidArgument("embedding and sentence lists differ in length");
  }
  std::vector<std::vector<float>> rows;
  std::vector<std::vector<TokenId>> tokens;
  rows.reserve(embeddings.size());
  tokens.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i].token_ids.empty()) {
      throw InvalidArgument("sentence " + std::to_string(i) +
                            " has no token ids; encode the corpus first");
    }
    if (i > 0 && embeddings[i].victim_id != embeddings[0].victim_id) {
      throw InvalidArgument("batch mixes embeddings from different victims");
    }
    rows.push_back(embeddings[i].values);
    tokens.push_back(sentences[i].token_ids);
  }
  return BuildTrainingBatch(std::span<const std::vector<float>>(rows),
                            std::span<const std::vector<TokenId>>(tokens));
}

template <typename T>
GeiaAttacker<T>::GeiaAttacker(const GeiaConfig& config)
    : config_(config),
      scaler_("geia.scaler", config.embed_dim),
      align_("geia.align", config.embed_dim, config.width),
      token_table_("geia.tokens", config.vocab_size, config.width),
      position_table_("geia.positions", config.max_positions, config.width),
      final_ln_("geia.final_ln", config.width),
      head_("geia.head", config.width, config.vocab_size) {
  if (config.vocab_size < 4 || config.embed_dim < 1 || config.width < 1 ||
      config.layers < 1 || config.max_positions < 2) {
    throw InvalidArgument("invalid GEIA attacker configuration");
  }
  for (int i = 0; i < config.layers; ++i) {
    blocks_.emplace_back("geia.block" + std::to_string(i), config.width,
                         config.heads, /*causal=*/true);
  }
  Rng rng(config.init_seed);
  for (auto* p : Parameters()) {
    const bool is_bias = p->name.ends_with(".bias");
    const bool is_norm = p->name.ends_with(".gain") || p->name.ends_with(".shift");
    if (is_bias || is_norm) continue;
    nn::InitNormal(*p, rng, 0.02);
  }
  if (config.zero_init_head) {
    head_.weight.value.setZero();
    head_.bias.value.setZero();
  }
}

template <typename T>
nn::ParameterRefs<T> GeiaAttacker<T>::Parameters() {
  nn::ParameterRefs<T> out;
  align_.Collect(out);
  out.push_back(&token_table_);
  out.push_back(&position_table_);
  for (auto& block : blocks_) block.Collect(out);
  final_ln_.Collect(out);
  head_.Collect(out);
  return out;
}

template <typename T>
nn::ParameterRefs<T> GeiaAttacker<T>::Tensors() {
  nn::ParameterRefs<T> out;
  scaler_.Collect(out);
  auto params = Parameters();
  out.insert(out.end(), params.begin(), params.end());
  return out;
}

template <typename T>
typename GeiaAttacker<T>::Matrix GeiaAttacker<T>::InputRepresentations(
    const TrainingBatch& batch) const {
  if (batch.max_len > config_.max_positions) {
    throw InvalidArgument("sequence of length " + std::to_string(batch.max_len) +
                          " exceeds the attacker context of " +
                          std::to_string(config_.max_positions));
  }
  for (const auto& e : batch.embeddings) {
    if (static_cast<int>(e.size()) != config_.embed_dim) {
      throw InvalidArgument("embedding dimension " + std::to_string(e.size()) +
                            " does not match attacker input " +
                            std::to_string(config_.embed_dim));
    }
  }
  Matrix aligned = align_.Forward(
      scaler_.Apply(std::span<const std::vector<float>>(batch.embeddings)));
  Matrix x = Matrix::Zero(batch.batch * batch.max_len, config_.width);
  for (int b = 0; b < batch.batch; ++b) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(b) * batch.max_len;
    x.row(r0) = aligned.row(b);
    for (int t = 1; t < batch.lengths[b]; ++t) {
      const TokenId id = batch.inputs[r0 + t];
      if (id < 0 || id >= config_.vocab_size) {
        throw InvalidArgument("token id outside the attacker vocabulary");
      }
      x.row(r0 + t) = token_table_.value.row(id);
    }
  }
  return x;
}

template <typename T>
typename GeiaAttacker<T>::Matrix GeiaAttacker<T>::Hidden(
    const TrainingBatch& batch, Tape* tape) const {
  Matrix x = InputRepresentations(batch);
  for (int b = 0; b < batch.batch; ++b) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(b) * batch.max_len;
    for (int t = 0; t < batch.lengths[b]; ++t) {
      x.row(r0 + t) += position_table_.value.row(t);
    }
  }
  const nn::SequenceLayout layout = batch.layout();
  if (tape) {
    tape->layout = layout;
    tape->embeddings =
        scaler_.Apply(std::span<const std::vector<float>>(batch.embeddings));
    tape->blocks.resize(blocks_.size());
  }
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    x = blocks_[i].Forward(x, layout, tape ? &tape->blocks[i] : nullptr);
  }
  Matrix normed = final_ln_.Forward(x, tape ? &tape->final_ln : nullptr);
  if (tape) tape->normed = normed;
  return normed;
}

template <typename T>
typename GeiaAttacker<T>::Matrix GeiaAttacker<T>::Logits(
    const TrainingBatch& batch) const {
  return head_.Forward(Hidden(batch, nullptr));
}

namespace {

// Cross-entropy of one logits row against `target`; optionally writes
// softmax(row) into `probs`.
template <typename RowT, typename OutT>
double RowCrossEntropy(const RowT& row, int target, OutT* probs) {
  using T = typename RowT::Scalar;
  const T m = row.maxCoeff();
  auto shifted = (row.array() - m).exp();
  const T z = shifted.sum();
  if (probs) *probs = shifted / z;
  return -(static_cast<double>(row(target) - m) - std::log(static_cast<double>(z)));
}

}  // namespace

template <typename T>
std::pair<double, std::size_t> GeiaAttacker<T>::LossSum(
    const TrainingBatch& batch) const {
  Matrix logits = Logits(batch);
  double total = 0;
  std::size_t count = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    if (!batch.mask[r]) continue;
    total += RowCrossEntropy(logits.row(r), batch.targets[r],
                             static_cast<nn::RowVector<T>*>(nullptr));
    ++count;
  }
  return {total, count};
}

template <typename T>
double GeiaAttacker<T>::Loss(const TrainingBatch& batch) const {
  auto [total, count] = LossSum(batch);
  return count ? total / static_cast<double>(count) : 0.0;
}

template <typename T>
double GeiaAttacker<T>::LossAndBackward(const TrainingBatch& batch) {
  Tape tape;
  Matrix normed = Hidden(batch, &tape);
  Matrix logits = head_.Forward(normed);
  const std::size_t count = batch.valid_positions();
  if (count == 0) return 0.0;
  const T inv_count = T(1) / static_cast<T>(count);

  Matrix dlogits = Matrix::Zero(logits.rows(), logits.cols());
  double total = 0;
  nn::RowVector<T> probs;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    if (!batch.mask[r]) continue;
    total += RowCrossEntropy(logits.row(r), batch.targets[r], &probs);
    dlogits.row(r) = probs * inv_count;
    dlogits(r, batch.targets[r]) -= inv_count;
  }

  Matrix dx = final_ln_.Backward(tape.final_ln, head_.Backward(normed, dlogits));
  for (std::size_t i = blocks_.size(); i-- > 0;) {
    dx = blocks_[i].Backward(tape.blocks[i], tape.layout, dx);
  }
  Matrix dalign(batch.batch, config_.width);
  for (int b = 0; b < batch.batch; ++b) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(b) * batch.max_len;
    dalign.row(b) = dx.row(r0);
    for (int t = 0; t < batch.lengths[b]; ++t) {
      position_table_.grad.row(t) += dx.row(r0 + t);
      if (t >= 1) token_table_.grad.row(batch.inputs[r0 + t]) += dx.row(r0 + t);
    }
  }
  align_.Backward(tape.embeddings, dalign);
  return total / static_cast<double>(count);
}

template <typename T>
typename GeiaAttacker<T>::Matrix GeiaAttacker<T>::NextTokenLogProbs(
    std::span<const float> embedding,
    std::span<const std::vector<TokenId>> prefixes) const {
  std::vector<std::vector<float>> rows(
      prefixes.size(), std::vector<float>(embedding.begin(), embedding.end()));
  TrainingBatch batch = BuildTrainingBatch(
      std::span<const std::vector<float>>(rows), prefixes);
  Matrix normed = Hidden(batch, nullptr);
  Matrix last(batch.batch, config_.width);
  for (int b = 0; b < batch.batch; ++b) {
    last.row(b) = normed.row(static_cast<Eigen::Index>(b) * batch.max_len +
                             batch.lengths[b] - 1);
  }
  return nn::LogSoftmaxRows<T>(head_.Forward(last));
}

template <typename T>
double EvaluateGeia(const GeiaAttacker<T>& attacker,
                    std::span<const SentenceEmbedding> embeddings,
                    std::span<const AnnotatedSentence> sentences,
                    int batch_size) {
  if (embeddings.size() != sentences.size()) {
    throw InvalidArgument("embedding and sentence lists differ in length");
  }
  double total = 0;
  std::size_t count = 0;
  const std::size_t step = static_cast<std::size_t>(std::max(1, batch_size));
  for (std::size_t lo = 0; lo < sentences.size(); lo += step) {
    const std::size_t n = std::min(step, sentences.size() - lo);
    auto batch = BuildTrainingBatch(embeddings.subspan(lo, n),
                                    sentences.subspan(lo, n));
    auto [sum, positions] = attacker.LossSum(batch);
    total += sum;
    count += positions;
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

template <typename T>
nn::FitResult TrainGeia(GeiaAttacker<T>& attacker,
                        std::span<const SentenceEmbedding> train_embeddings,
                        std::span<const AnnotatedSentence> train_sentences,
                        std::span<const SentenceEmbedding> dev_embeddings,
                        std::span<const AnnotatedSentence> dev_sentences,
                        const nn::TrainOptions& options,
                        const std::function<void(const nn::EpochRecord&)>& on_epoch) {
  if (train_embeddings.size() != train_sentences.size() ||
      dev_embeddings.size() != dev_sentences.size()) {
    throw InvalidArgument("embedding and sentence lists differ in length");
  }
  std::vector<std::vector<float>> rows;
  rows.reserve(train_embeddings.size());
  for (const auto& e : train_embeddings) rows.push_back(e.values);
  attacker.scaler().Fit(rows);

  std::vector<SentenceEmbedding> batch_embeddings;
  std::vector<AnnotatedSentence> batch_sentences;
  auto step = [&](std::span<const std::size_t> idx) {
    batch_embeddings.clear();
    batch_sentences.clear();
    for (std::size_t i : idx) {
      batch_embeddings.push_back(train_embeddings[i]);
      batch_sentences.push_back(train_sentences[i]);
    }
    return attacker.LossAndBackward(
        BuildTrainingBatch(batch_embeddings, batch_sentences));
  };
  auto dev = [&]() -> std::optional<double> {
    if (dev_sentences.empty()) return std::nullopt;
    return EvaluateGeia(attacker, dev_embeddings, dev_sentences,
                        options.batch_size);
  };
  return nn::Fit<T>(attacker.Parameters(), train_sentences.size(), options,
                    step, dev, on_epoch);
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int ClampLength(int max_len, int max_positions) {
  return std::max(0, std::min(max_len, max_positions - 1));
}

// Argmax over a row, ignoring <pad>; ties go to the lowest id.
template <typename Row>
TokenId ArgmaxToken(const Row& row) {
  TokenId best = -1;
  double best_value = kNegInf;
  for (Eigen::Index v = 0; v < row.size(); ++v) {
    if (v == Vocabulary::kPadId) continue;
    const double value = static_cast<double>(row(v));
    if (best < 0 || value > best_value) {
      best = static_cast<TokenId>(v);
      best_value = value;
    }
  }
  return best;
}

}  // namespace

template <typename T>
DecodedSequence DecodeGreedy(const GeiaAttacker<T>& attacker,
                             std::span<const float> embedding, int max_len) {
  const int limit = ClampLength(max_len, attacker.config().max_positions);
  DecodedSequence out;
  std::vector<std::vector<TokenId>> prefix(1);
  for (int step = 0; step < limit; ++step) {
    auto lp = attacker.NextTokenLogProbs(embedding, prefix);
    const TokenId next = ArgmaxToken(lp.row(0));
    out.log_prob += static_cast<double>(lp(0, next));
    if (next == Vocabulary::kEosId) {
      out.finished = true;
      break;
    }
    prefix[0].push_back(next);
  }
  out.tokens = std::move(prefix[0]);
  return out;
}

template <typename T>
DecodedSequence DecodeBeam(const GeiaAttacker<T>& attacker,
                           std::span<const float> embedding, int beam_size,
                           int max_len) {
  if (beam_size < 1) throw InvalidArgument("beam size must be >= 1");
  const int limit = ClampLength(max_len, attacker.config().max_positions);

  struct Candidate {
    double score;
    std::size_t parent;
    TokenId token;
  };
  std::vector<std::vector<TokenId>> alive(1);
  std::vector<double> alive_scores(1, 0.0);
  std::vector<DecodedSequence> finished;

  for (int step = 0; step < limit && !alive.empty(); ++step) {
    auto lp = attacker.NextTokenLogProbs(embedding, alive);
    std::vector<Candidate> candidates;
    candidates.reserve(alive.size() * static_cast<std::size_t>(lp.cols()));
    for (std::size_t a = 0; a < alive.size(); ++a) {
      for (Eigen::Index v = 0; v < lp.cols(); ++v) {
        if (v == Vocabulary::kPadId) continue;
        candidates.push_back({alive_scores[a] + static_cast<double>(lp(a, v)), a,
                              static_cast<TokenId>(v)});
      }
    }
    const std::size_t keep =
        std::min(candidates.size(), static_cast<std::size_t>(beam_size));
    std::partial_sort(candidates.begin(), candidates.begin() + keep,
                      candidates.end(), [](const Candidate& x, const Candidate& y) {
                        if (x.score != y.score) return x.score > y.score;
                        if (x.parent != y.parent) return x.parent < y.parent;
                        return x.token < y.token;
                      });
    std::vector<std::vector<TokenId>> next_alive;
    std::vector<double> next_scores;
    for (std::size_t i = 0; i < keep; ++i) {
      const auto& c = candidates[i];
      if (c.token == Vocabulary::kEosId) {
        finished.push_back({alive[c.parent], c.score, true});
      } else {
        auto seq = alive[c.parent];
        seq.push_back(c.token);
        next_alive.push_back(std::move(seq));
        next_scores.push_back(c.score);
      }
    }
    alive = std::move(next_alive);
    alive_scores = std::move(next_scores);
    // Scores only decrease, so a finished hypothesis at least as good as
    // every live one cannot be overtaken.
    if (!finished.empty() && !alive.empty()) {
      double best_finished = kNegInf;
      for (const auto& f : finished) best_finished = std::max(best_finished, f.log_prob);
      if (best_finished >= alive_scores.front()) break;
    }
  }
  for (std::size_t a = 0; a < alive.size(); ++a) {
    finished.push_back({alive[a], alive_scores[a], false});
  }
  if (finished.empty()) return {};
  std::size_t best = 0;
  for (std::size_t i = 1; i < finished.size(); ++i) {
    if (finished[i].log_prob > finished[best].log_prob) best = i;
  }
  return finished[best];
}

template <typename T>
DecodedSequence DecodeNucleus(const GeiaAttacker<T>& attacker,
                              std::span<const float> embedding,
                              const NucleusOptions& options, int max_len) {
  if (!(options.top_p > 0 && options.top_p <= 1)) {
    throw InvalidArgument("top_p must lie in (0, 1]");
  }
  if (!(options.temperature > 0)) throw InvalidArgument("temperature must be > 0");
  const int limit = ClampLength(max_len, attacker.config().max_positions);
  Rng rng(options.seed);
  DecodedSequence out;
  std::vector<std::vector<TokenId>> prefix(1);
  std::vector<std::pair<double, TokenId>> ranked;
  for (int step = 0; step < limit; ++step) {
    auto lp = attacker.NextTokenLogProbs(embedding, prefix);
    const Eigen::Index vocab = lp.cols();
    double max_scaled = kNegInf;
    for (Eigen::Index v = 0; v < vocab; ++v) {
      if (v == Vocabulary::kPadId) continue;
      max_scaled = std::max(max_scaled, static_cast<double>(lp(0, v)) / options.temperature);
    }
    ranked.clear();
    double z = 0;
    for (Eigen::Index v = 0; v < vocab; ++v) {
      if (v == Vocabulary::kPadId) continue;
      const double w =
          std::exp(static_cast<double>(lp(0, v)) / options.temperature - max_scaled);
      ranked.emplace_back(w, static_cast<TokenId>(v));
      z += w;
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    double mass = 0;
    std::size_t nucleus = 0;
    while (nucleus < ranked.size()) {
      mass += ranked[nucleus].first / z;
      ++nucleus;
      if (mass >= options.top_p) break;
    }
    double u = rng.Uniform() * mass;
    TokenId next = ranked[nucleus - 1].second;
    for (std::size_t i = 0; i < nucleus; ++i) {
      u -= ranked[i].first / z;
      if (u < 0) {
        next = ranked[i].second;
        break;
      }
    }
    out.log_prob += static_cast<double>(lp(0, next));
    if (next == Vocabulary::kEosId) {
      out.finished = true;
      break;
    }
    prefix[0].push_back(next);
  }
  out.tokens = std::move(prefix[0]);
  return out;
}

#define INVLAB_INSTANTIATE(T)                                                  \
  template class GeiaAttacker<T>;                                              \
  template nn::FitResult TrainGeia<T>(                                         \
      GeiaAttacker<T>&, std::span<const SentenceEmbedding>,                    \
      std::span<const AnnotatedSentence>, std::span<const SentenceEmbedding>,  \
      std::span<const AnnotatedSentence>, const nn::TrainOptions&,             \
      const std::function<void(const nn::EpochRecord&)>&);                     \
  template double EvaluateGeia<T>(const GeiaAttacker<T>&,                      \
                                  std::span<const SentenceEmbedding>,          \
                                  std::span<const AnnotatedSentence>, int);    \
  template DecodedSequence DecodeGreedy<T>(const GeiaAttacker<T>&,             \
                                           std::span<const float>, int);       \
  template DecodedSequence DecodeBeam<T>(const GeiaAttacker<T>&,               \
                                         std::span<const float>, int, int);    \
  template DecodedSequence DecodeNucleus<T>(                                   \
      const GeiaAttacker<T>&, std::span<const float>, const NucleusOptions&,   \
      int);

INVLAB_INSTANTIATE(float)
INVLAB_INSTANTIATE(double)
#undef INVLAB_INSTANTIATE

}  // namespace invlab
