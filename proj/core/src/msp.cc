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

#include "invlab/msp.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "invlab/error.h"
#include "invlab/rng.h"

namespace invlab {

namespace {

constexpr TokenId kFirstContent = static_cast<TokenId>(Vocabulary::kNumSpecials);

std::vector<TokenId> LabelSet(std::span<const TokenId> tokens) {
  std::vector<TokenId> labels;
  for (TokenId t : tokens) {
    if (t >= kFirstContent) labels.push_back(t);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

std::vector<std::vector<float>> Rows(std::span<const SentenceEmbedding> e) {
  std::vector<std::vector<float>> rows;
  rows.reserve(e.size());
  for (const auto& x : e) rows.push_back(x.values);
  return rows;
}

double LogSumExp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  double s = 0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

template <typename T>
MspAttacker<T>::MspAttacker(const MspConfig& config)
    : config_(config),
      scaler_("msp.scaler", config.embed_dim),
      cell_("msp.gru", config.embed_dim, config.hidden),
      head_("msp.head", config.hidden, config.vocab_size) {
  if (config.vocab_size <= kFirstContent || config.embed_dim < 1 ||
      config.hidden < 1 || config.steps < 1) {
    throw InvalidArgument("invalid MSP attacker configuration");
  }
  Rng rng(config.init_seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.hidden));
  for (auto* p : Parameters()) nn::InitUniform(*p, rng, -bound, bound);
}

template <typename T>
nn::ParameterRefs<T> MspAttacker<T>::Parameters() {
  nn::ParameterRefs<T> out;
  cell_.Collect(out);
  head_.Collect(out);
  return out;
}

template <typename T>
nn::ParameterRefs<T> MspAttacker<T>::Tensors() {
  nn::ParameterRefs<T> out;
  scaler_.Collect(out);
  auto params = Parameters();
  out.insert(out.end(), params.begin(), params.end());
  return out;
}

template <typename T>
std::vector<typename MspAttacker<T>::Matrix> MspAttacker<T>::StepLogits(
    std::span<const std::vector<float>> embeddings) const {
  Matrix x = scaler_.Apply(embeddings);
  Matrix gi = cell_.InputGates(x);
  Matrix h = Matrix::Zero(x.rows(), config_.hidden);
  std::vector<Matrix> out;
  out.reserve(config_.steps);
  for (int t = 0; t < config_.steps; ++t) {
    h = cell_.StepForward(gi, h, nullptr);
    out.push_back(head_.Forward(h));
  }
  return out;
}

template <typename T>
double MspAttacker<T>::Run(std::span<const std::vector<float>> embeddings,
                           std::span<const std::vector<TokenId>> tokens,
                           bool backward,
                           std::vector<std::vector<double>>* step_losses) {
  if (embeddings.size() != tokens.size()) {
    throw InvalidArgument("embedding and sentence lists differ in length");
  }
  const Eigen::Index batch = static_cast<Eigen::Index>(embeddings.size());
  if (batch == 0) return 0.0;
  for (const auto& e : embeddings) {
    if (static_cast<int>(e.size()) != config_.embed_dim) {
      throw InvalidArgument("embedding dimension does not match MSP input");
    }
  }
  Matrix x = scaler_.Apply(embeddings);
  Matrix gi = cell_.InputGates(x);
  Matrix h = Matrix::Zero(batch, config_.hidden);

  std::vector<typename nn::Gru<T>::Step> steps(backward ? config_.steps : 0);
  std::vector<Matrix> hiddens;
  std::vector<Matrix> dlogits;
  std::vector<std::vector<TokenId>> remaining;
  for (const auto& seq : tokens) remaining.push_back(LabelSet(seq));
  if (step_losses) step_losses->assign(static_cast<std::size_t>(batch), {});

  const T inv_batch = T(1) / static_cast<T>(batch);
  double total = 0;
  std::vector<double> all, subset;
  for (int t = 0; t < config_.steps; ++t) {
    h = cell_.StepForward(gi, h, backward ? &steps[t] : nullptr);
    Matrix logits = head_.Forward(h);
    Matrix grad;
    if (backward) grad = Matrix::Zero(logits.rows(), logits.cols());
    for (Eigen::Index b = 0; b < batch; ++b) {
      auto& rem = remaining[static_cast<std::size_t>(b)];
      double step_loss = 0;
      if (!rem.empty()) {
        all.assign(logits.cols(), 0.0);
        for (Eigen::Index v = 0; v < logits.cols(); ++v) {
          all[v] = static_cast<double>(logits(b, v));
        }
        subset.clear();
        for (TokenId w : rem) subset.push_back(all[w]);
        const double lse_all = LogSumExp(all);
        const double lse_rem = LogSumExp(subset);
        step_loss = lse_all - lse_rem;
        if (backward) {
          // d/dz_j of -log sum_R p = p_j - [j in R] p_j / sum_R p
          for (Eigen::Index v = 0; v < logits.cols(); ++v) {
            grad(b, v) = static_cast<T>(std::exp(all[v] - lse_all)) * inv_batch;
          }
          for (TokenId w : rem) {
            grad(b, w) -= static_cast<T>(std::exp(all[w] - lse_rem)) * inv_batch;
          }
        }
        // Emit the most probable remaining token; rem is sorted, so the
        // first maximum is the lowest id.
        std::size_t best = 0;
        for (std::size_t i = 1; i < rem.size(); ++i) {
          if (subset[i] > subset[best]) best = i;
        }
        rem.erase(rem.begin() + static_cast<std::ptrdiff_t>(best));
      }
      total += step_loss;
      if (step_losses) (*step_losses)[static_cast<std::size_t>(b)].push_back(step_loss);
    }
    if (backward) {
      hiddens.push_back(h);
      dlogits.push_back(std::move(grad));
    }
  }

  if (backward) {
    Matrix dgi = Matrix::Zero(gi.rows(), gi.cols());
    Matrix carry = Matrix::Zero(batch, config_.hidden);
    for (int t = config_.steps - 1; t >= 0; --t) {
      Matrix dh = carry + head_.Backward(hiddens[t], dlogits[t]);
      carry = cell_.StepBackward(steps[t], dh, dgi);
    }
    cell_.InputBackward(x, dgi);
  }
  return total / static_cast<double>(batch);
}

template <typename T>
double MspAttacker<T>::Loss(std::span<const std::vector<float>> embeddings,
                            std::span<const std::vector<TokenId>> tokens) const {
  // Run() without backward only reads parameters.
  return const_cast<MspAttacker*>(this)->Run(embeddings, tokens, false, nullptr);
}

template <typename T>
double MspAttacker<T>::LossAndBackward(
    std::span<const std::vector<float>> embeddings,
    std::span<const std::vector<TokenId>> tokens) {
  return Run(embeddings, tokens, true, nullptr);
}

template <typename T>
std::vector<double> MspAttacker<T>::StepLosses(
    std::span<const float> embedding, std::span<const TokenId> tokens) const {
  std::vector<std::vector<float>> rows{
      std::vector<float>(embedding.begin(), embedding.end())};
  std::vector<std::vector<TokenId>> seqs{
      std::vector<TokenId>(tokens.begin(), tokens.end())};
  std::vector<std::vector<double>> losses;
  const_cast<MspAttacker*>(this)->Run(rows, seqs, false, &losses);
  return losses.front();
}

template <typename T>
nn::FitResult TrainMsp(MspAttacker<T>& attacker,
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
  const auto train_rows = Rows(train_embeddings);
  attacker.scaler().Fit(train_rows);
  std::vector<std::vector<TokenId>> train_tokens;
  for (const auto& s : train_sentences) train_tokens.push_back(s.token_ids);
  const auto dev_rows = Rows(dev_embeddings);
  std::vector<std::vector<TokenId>> dev_tokens;
  for (const auto& s : dev_sentences) dev_tokens.push_back(s.token_ids);

  std::vector<std::vector<float>> xb;
  std::vector<std::vector<TokenId>> tb;
  auto step = [&](std::span<const std::size_t> idx) {
    xb.clear();
    tb.clear();
    for (std::size_t i : idx) {
      xb.push_back(train_rows[i]);
      tb.push_back(train_tokens[i]);
    }
    return attacker.LossAndBackward(xb, tb);
  };
  auto dev = [&]() -> std::optional<double> {
    if (dev_rows.empty()) return std::nullopt;
    return attacker.Loss(dev_rows, dev_tokens);
  };
  return nn::Fit<T>(attacker.Parameters(), train_sentences.size(), options,
                    step, dev, on_epoch);
}

template <typename T>
std::vector<TokenId> PredictMspOrdered(const MspAttacker<T>& attacker,
                                       std::span<const float> embedding) {
  std::vector<std::vector<float>> rows{
      std::vector<float>(embedding.begin(), embedding.end())};
  auto logits = attacker.StepLogits(rows);
  std::vector<TokenId> emitted;
  std::vector<bool> used(static_cast<std::size_t>(attacker.config().vocab_size), false);
  for (const auto& step : logits) {
    TokenId best = -1;
    for (Eigen::Index v = kFirstContent; v < step.cols(); ++v) {
      if (used[v]) continue;
      if (best < 0 || step(0, v) > step(0, best)) best = static_cast<TokenId>(v);
    }
    if (best < 0) break;
    used[best] = true;
    emitted.push_back(best);
  }
  return emitted;
}

template <typename T>
std::vector<TokenId> PredictMsp(const MspAttacker<T>& attacker,
                                std::span<const float> embedding) {
  auto out = PredictMspOrdered(attacker, embedding);
  std::sort(out.begin(), out.end());
  return out;
}

#define INVLAB_INSTANTIATE(T)                                                 \
  template class MspAttacker<T>;                                              \
  template nn::FitResult TrainMsp<T>(                                         \
      MspAttacker<T>&, std::span<const SentenceEmbedding>,                    \
      std::span<const AnnotatedSentence>, std::span<const SentenceEmbedding>, \
      std::span<const AnnotatedSentence>, const nn::TrainOptions&,            \
      const std::function<void(const nn::EpochRecord&)>&);                    \
  template std::vector<TokenId> PredictMsp<T>(const MspAttacker<T>&,          \
                                              std::span<const float>);        \
  template std::vector<TokenId> PredictMspOrdered<T>(const MspAttacker<T>&,   \
                                                     std::span<const float>);

INVLAB_INSTANTIATE(float)
INVLAB_INSTANTIATE(double)
#undef INVLAB_INSTANTIATE

}  // namespace invlab
