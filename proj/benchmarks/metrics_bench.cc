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

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "invlab/metrics.h"
#include "invlab/rng.h"

namespace {

using invlab::TokenId;

std::vector<std::vector<TokenId>> RandomCorpus(int n, int len, int vocab,
                                               std::uint64_t seed) {
  invlab::Rng rng(seed);
  std::vector<std::vector<TokenId>> out(n);
  for (auto& s : out) {
    s.resize(len);
    for (auto& t : s) t = static_cast<TokenId>(rng.Below(vocab));
  }
  return out;
}

void BM_CorpusBleu4(benchmark::State& state) {
  const auto c = RandomCorpus(500, static_cast<int>(state.range(0)), 200, 1);
  const auto r = RandomCorpus(500, static_cast<int>(state.range(0)), 200, 2);
  for (auto _ : state) benchmark::DoNotOptimize(invlab::CorpusMeanBleu(c, r, 4));
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_CorpusBleu4)->Arg(10)->Arg(30);

void BM_CorpusRougeL(benchmark::State& state) {
  const auto c = RandomCorpus(500, static_cast<int>(state.range(0)), 200, 3);
  const auto r = RandomCorpus(500, static_cast<int>(state.range(0)), 200, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        invlab::CorpusMeanRouge(c, r, invlab::RougeVariant::kRougeL));
  }
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_CorpusRougeL)->Arg(10)->Arg(30);

void BM_MicroPrf(benchmark::State& state) {
  const auto p = RandomCorpus(500, 12, 200, 5);
  const auto r = RandomCorpus(500, 12, 200, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(invlab::MicroPrf(p, r, invlab::MatchMode::kMultiset));
  }
}
BENCHMARK(BM_MicroPrf);

void BM_CharacterEditDistance(benchmark::State& state) {
  invlab::Rng rng(7);
  std::vector<std::string> g(500), r(500);
  for (auto* list : {&g, &r}) {
    for (auto& s : *list) {
      s.resize(static_cast<std::size_t>(state.range(0)));
      for (auto& ch : s) ch = static_cast<char>('a' + rng.Below(26));
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(invlab::EditDistance(g, r));
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_CharacterEditDistance)->Arg(40)->Arg(160);

}  // namespace
