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

#include "invlab/mlc.h"

#include <cmath>

#include "invlab/error.h"
#include "invlab/metrics.h"
#include "invlab/rng.h"

namespace invlab {

namespace {

constexpr TokenId kFirstContent = static_cast<TokenId>(Vocabulary::kNumSpecials);

std::vector<std::vector<float>> Rows(std::span<const SentenceEmbedding> e) {
  std::vector<std::vector<float>> rows;
  rows.reserve(e.size());
  for (const auto& x : e) rows.push_back(x.values);
  return rows;
}

}  // namespace

template <typename T>
MlcAttacker<T>::MlcAttacker(const MlcConfig& config)
    : config_(config),
      scaler_("mlc.scaler", config.embed_dim),
      layer_("mlc.layer", config.embed_dim, config.vocab_size) {
  if (config.vocab_size <= kFirstContent || config.embed_dim < 1) {
    throw InvalidArgument("invalid MLC attacker configuration");
  }
  Rng rng(config.init_seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.embed_dim));
  nn::InitUniform(layer_.weight, rng, -bound, bound);
}

template <typename T>
nn::ParameterRefs<T> MlcAttacker<T>::Parameters() {
  nn::ParameterRefs<T> out;
  layer_.Collect(out);
  return out;
}

template <typename T>
nn::ParameterRefs<T> MlcAttacker<T>::Tensors() {
  nn::ParameterRefs<T> out;
  scaler_.Collect(out);
  layer_.Collect(out);
  return out;
}

template <typename T>
typename MlcAttacker<T>::Matrix MlcAttacker<T>::Scores(
    std::span<const std::vector<float>> embeddings) const {
  Matrix logits = layer_.Forward(scaler_.Apply(embeddings));
  return logits.unaryExpr([](T z) { return T(1) / (T(1) + std::exp(-z)); });
}

template <typename T>
typename MlcAttacker<T>::Matrix MlcAttacker<T>::PresenceTargets(
    std::span<const std::vector<TokenId>> tokens) const {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(tokens.size()),
                          config_.vocab_size);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (TokenId t : tokens[i]) {
      if (t >= kFirstContent && t < config_.vocab_size) {
        y(static_cast<Eigen::Index>(i), t) = 1;
      }
    }
  }
  return y;
}

template <typename T>
double MlcAttacker<T>::Loss(std::span<const std::vector<float>> embeddings,
                            std::span<const std::vector<TokenId>> tokens) const {
  Matrix logits = layer_.Forward(scaler_.Apply(embeddings));
  Matrix y = PresenceTargets(tokens);
  double total = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    for (Eigen::Index c = kFirstContent; c < logits.cols(); ++c) {
      const double z = static_cast<double>(logits(r, c));
      total += std::max(z, 0.0) - z * static_cast<double>(y(r, c)) +
               std::log1p(std::exp(-std::abs(z)));
    }
  }
  const double cells =
      static_cast<double>(logits.rows()) * (config_.vocab_size - kFirstContent);
  return cells > 0 ? total / cells : 0.0;
}

template <typename T>
double MlcAttacker<T>::LossAndBackward(
    std::span<const std::vector<float>> embeddings,
    std::span<const std::vector<TokenId>> tokens) {
  if (embeddings.size() != tokens.size()) {
    throw InvalidArgument("embedding and sentence lists differ in length");
  }
  Matrix x = scaler_.Apply(embeddings);
  Matrix logits = layer_.Forward(x);
  Matrix y = PresenceTargets(tokens);
  const double cells =
      static_cast<double>(logits.rows()) * (config_.vocab_size - kFirstContent);
  const T inv = static_cast<T>(1.0 / cells);
  Matrix dlogits = Matrix::Zero(logits.rows(), logits.cols());
  double total = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    for (Eigen::Index c = kFirstContent; c < logits.cols(); ++c) {
      const T z = logits(r, c);
      const double zd = static_cast<double>(z);
      total += std::max(zd, 0.0) - zd * static_cast<double>(y(r, c)) +
               std::log1p(std::exp(-std::abs(zd)));
      const T sig = T(1) / (T(1) + std::exp(-z));
      dlogits(r, c) = (sig - y(r, c)) * inv;
    }
  }
  layer_.Backward(x, dlogits);
  return total / cells;
}

template <typename T>
nn::FitResult TrainMlc(MlcAttacker<T>& attacker,
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
std::vector<TokenId> PredictMlc(const MlcAttacker<T>& attacker,
                                std::span<const float> embedding,
                                double threshold) {
  if (!(threshold >= 0 && threshold <= 1)) {
    throw InvalidArgument("MLC threshold must lie in [0, 1]");
  }
  std::vector<std::vector<float>> row{
      std::vector<float>(embedding.begin(), embedding.end())};
  auto scores = attacker.Scores(row);
  std::vector<TokenId> out;
  for (Eigen::Index c = kFirstContent; c < scores.cols(); ++c) {
    if (static_cast<double>(scores(0, c)) >= threshold) {
      out.push_back(static_cast<TokenId>(c));
    }
  }
  return out;
}

template <typename T>
SweepResult SweepThresholds(const MlcAttacker<T>& attacker,
                            std::span<const SentenceEmbedding> embeddings,
                            std::span<const AnnotatedSentence> references,
                            double interval) {
  if (embeddings.size() != references.size()) {
    throw InvalidArgument("embedding and reference lists differ in length");
  }
  if (!(interval > 0 && interval <= 1)) {
    throw InvalidArgument("sweep interval must lie in (0, 1]");
  }
  const long steps = std::lround(1.0 / interval);
  if (std::abs(static_cast<double>(steps) * interval - 1.0) > 1e-9) {
    throw InvalidArgument("sweep interval must divide 1 evenly");
  }
  const auto rows = Rows(embeddings);
  const auto scores = attacker.Scores(rows);

  std::vector<std::vector<TokenId>> refs;
  refs.reserve(references.size());
  for (const auto& s : references) {
    std::vector<TokenId> r;
    for (TokenId t : s.token_ids) {
      if (t >= kFirstContent) r.push_back(t);
    }
    refs.push_back(std::move(r));
  }

  SweepResult result;
  std::vector<std::vector<TokenId>> preds(references.size());
  for (long i = 0; i <= steps; ++i) {
    const double t = i == steps ? 1.0 : static_cast<double>(i) * interval;
    for (std::size_t r = 0; r < preds.size(); ++r) {
      preds[r].clear();
      for (Eigen::Index c = kFirstContent; c < scores.cols(); ++c) {
        if (static_cast<double>(scores(static_cast<Eigen::Index>(r), c)) >= t) {
          preds[r].push_back(static_cast<TokenId>(c));
        }
      }
    }
    const Prf prf = MicroPrf(preds, refs, MatchMode::kSet);
    result.points.push_back({t, prf.precision, prf.recall, prf.f1});
    if (i == 0 || prf.f1 > result.best_f1) {
      result.best_f1 = prf.f1;
      result.best_threshold = t;
    }
  }
  return result;
}

#define INVLAB_INSTANTIATE(T)                                                 \
  template class MlcAttacker<T>;                                              \
  template nn::FitResult TrainMlc<T>(                                         \
      MlcAttacker<T>&, std::span<const SentenceEmbedding>,                    \
      std::span<const AnnotatedSentence>, std::span<const SentenceEmbedding>, \
      std::span<const AnnotatedSentence>, const nn::TrainOptions&,            \
      const std::function<void(const nn::EpochRecord&)>&);                    \
  template std::vector<TokenId> PredictMlc<T>(const MlcAttacker<T>&,          \
                                              std::span<const float>, double); \
  template SweepResult SweepThresholds<T>(                                    \
      const MlcAttacker<T>&, std::span<const SentenceEmbedding>,              \
      std::span<const AnnotatedSentence>, double);

INVLAB_INSTANTIATE(float)
INVLAB_INSTANTIATE(double)
#undef INVLAB_INSTANTIATE

}  // namespace invlab
