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

#ifndef INVLAB_NN_SCALER_H_
#define INVLAB_NN_SCALER_H_

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "invlab/nn/tensor.h"

namespace invlab::nn {

// Per-feature standardization of victim embeddings, fitted on the
// attacker's training embeddings and stored with its checkpoint. Starts as
// the identity map.
template <typename T>
class EmbeddingScaler {
 public:
  EmbeddingScaler() = default;
  EmbeddingScaler(const std::string& name, int dim)
      : mean(name + ".mean", 1, dim), scale(name + ".scale", 1, dim) {
    scale.value.setOnes();
  }

  int dim() const { return static_cast<int>(mean.value.cols()); }

  void Fit(std::span<const std::vector<float>> rows) {
    if (rows.empty()) return;
    const int d = dim();
    std::vector<double> sum(d, 0.0), sq(d, 0.0);
    for (const auto& r : rows) {
      for (int j = 0; j < d; ++j) {
        sum[j] += r[j];
        sq[j] += static_cast<double>(r[j]) * r[j];
      }
    }
    const double n = static_cast<double>(rows.size());
    for (int j = 0; j < d; ++j) {
      const double m = sum[j] / n;
      const double var = std::max(0.0, sq[j] / n - m * m);
      const double sd = std::sqrt(var);
      mean.value(0, j) = static_cast<T>(m);
      scale.value(0, j) = static_cast<T>(sd > 1e-12 ? 1.0 / sd : 1.0);
    }
  }

  // One output row per input row.
  Matrix<T> Apply(std::span<const std::vector<float>> rows) const {
    const int d = dim();
    Matrix<T> out(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (int j = 0; j < d; ++j) {
        out(static_cast<Eigen::Index>(i), j) =
            (static_cast<T>(rows[i][j]) - mean.value(0, j)) * scale.value(0, j);
      }
    }
    return out;
  }

  void Collect(ParameterRefs<T>& out) { out.push_back(&mean); out.push_back(&scale); }

  Parameter<T> mean;
  Parameter<T> scale;
};

}  // namespace invlab::nn

#endif  // INVLAB_NN_SCALER_H_
