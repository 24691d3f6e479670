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

#ifndef INVLAB_NN_TRAINER_H_
#define INVLAB_NN_TRAINER_H_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invlab/error.h"
#include "invlab/nn/optimizer.h"
#include "invlab/nn/tensor.h"
#include "invlab/rng.h"

namespace invlab::nn {

struct TrainOptions {
  AdamOptions adam;
  int batch_size = 64;
  int epochs = 10;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double dev_loss = 0;
  double wall_seconds = 0;
};

struct FitResult {
  std::vector<EpochRecord> log;
  int best_epoch = 0;
  double best_loss = std::numeric_limits<double>::infinity();
};

// Mini-batch loop shared by every attacker.
//
// `step(indices)` must zero nothing, compute the mean loss of the given
// training rows and accumulate its gradient into the parameters.
// `dev_loss()` returns the held-out loss, or nullopt when there is no dev
// data (selection then falls back to the training loss). Parameters of the
// best epoch are restored before returning.
template <typename T>
FitResult Fit(const ParameterRefs<T>& params, std::size_t n_train,
              const TrainOptions& options,
              const std::function<double(std::span<const std::size_t>)>& step,
              const std::function<std::optional<double>()>& dev_loss,
              const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  if (n_train == 0) throw InvalidArgument("training split is empty");
  if (options.batch_size <= 0) throw InvalidArgument("batch size must be positive");
  Adam<T> adam(params, options.adam);
  Rng rng(options.seed);
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);

  FitResult result;
  std::vector<Matrix<T>> best = Snapshot(params);
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.Shuffle(std::span<std::size_t>(order));
    double weighted = 0;
    std::size_t batch_index = 0;
    for (std::size_t lo = 0; lo < n_train;
         lo += static_cast<std::size_t>(options.batch_size), ++batch_index) {
      const std::size_t hi =
          std::min(n_train, lo + static_cast<std::size_t>(options.batch_size));
      ZeroGrads(params);
      const double loss =
          step(std::span<const std::size_t>(order.data() + lo, hi - lo));
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite training loss at epoch " +
                               std::to_string(epoch) + ", batch " +
                               std::to_string(batch_index),
                           batch_index);
      }
      weighted += loss * static_cast<double>(hi - lo);
      adam.Step();
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = weighted / static_cast<double>(n_train);
    const std::optional<double> dev = dev_loss ? dev_loss() : std::nullopt;
    record.dev_loss = dev.value_or(record.train_loss);
    record.wall_seconds = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
    result.log.push_back(record);
    if (on_epoch) on_epoch(record);
    if (record.dev_loss < result.best_loss || result.best_epoch == 0) {
      result.best_loss = record.dev_loss;
      result.best_epoch = epoch;
      best = Snapshot(params);
    }
  }
  if (options.epochs > 0) Restore(params, best);
  return result;
}

}  // namespace invlab::nn

#endif  // INVLAB_NN_TRAINER_H_
