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

// Training step and decoding cost at the default attacker sizes.

#include <benchmark/benchmark.h>

#include <vector>

#include "invlab/geia.h"
#include "invlab/msp.h"
#include "invlab/rng.h"

namespace {

using invlab::TokenId;

constexpr int kVocab = 500;
constexpr int kDim = 64;

struct Batch {
  std::vector<std::vector<float>> embeddings;
  std::vector<std::vector<TokenId>> tokens;
};

Batch RandomBatch(int n, int len, std::uint64_t seed) {
  invlab::Rng rng(seed);
  Batch b;
  for (int i = 0; i < n; ++i) {
    std::vector<float> e(kDim);
    for (auto& x : e) x = static_cast<float>(rng.Normal(0, 1));
    b.embeddings.push_back(e);
    std::vector<TokenId> t(len);
    for (auto& id : t) id = static_cast<TokenId>(3 + rng.Below(kVocab - 3));
    b.tokens.push_back(t);
  }
  return b;
}

invlab::GeiaConfig DefaultGeia() {
  invlab::GeiaConfig c;
  c.vocab_size = kVocab;
  c.embed_dim = kDim;
  return c;
}

void BM_GeiaTrainStep(benchmark::State& state) {
  invlab::GeiaAttacker<float> a(DefaultGeia());
  const auto b = RandomBatch(static_cast<int>(state.range(0)), 12, 1);
  const auto batch = invlab::BuildTrainingBatch(
      std::span<const std::vector<float>>(b.embeddings),
      std::span<const std::vector<TokenId>>(b.tokens));
  for (auto _ : state) {
    invlab::nn::ZeroGrads(a.Parameters());
    benchmark::DoNotOptimize(a.LossAndBackward(batch));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GeiaTrainStep)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_GeiaBeamDecode(benchmark::State& state) {
  invlab::GeiaAttacker<float> a(DefaultGeia());
  const auto b = RandomBatch(1, 1, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(invlab::DecodeBeam(a, b.embeddings[0],
                                                static_cast<int>(state.range(0)), 16));
  }
}
BENCHMARK(BM_GeiaBeamDecode)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_GeiaNucleusDecode(benchmark::State& state) {
  invlab::GeiaAttacker<float> a(DefaultGeia());
  const auto b = RandomBatch(1, 1, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(invlab::DecodeNucleus(a, b.embeddings[0], {}, 16));
  }
}
BENCHMARK(BM_GeiaNucleusDecode)->Unit(benchmark::kMillisecond);

void BM_MspTrainStep(benchmark::State& state) {
  invlab::MspConfig c;
  c.vocab_size = kVocab;
  c.embed_dim = kDim;
  invlab::MspAttacker<float> a(c);
  const auto b = RandomBatch(64, 10, 4);
  for (auto _ : state) {
    invlab::nn::ZeroGrads(a.Parameters());
    benchmark::DoNotOptimize(a.LossAndBackward(b.embeddings, b.tokens));
  }
}
BENCHMARK(BM_MspTrainStep)->Unit(benchmark::kMillisecond);

}  // namespace
