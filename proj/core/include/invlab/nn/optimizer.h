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

#ifndef INVLAB_NN_OPTIMIZER_H_
#define INVLAB_NN_OPTIMIZER_H_

#include <vector>

#include "invlab/nn/tensor.h"

namespace invlab::nn {

struct AdamOptions {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global gradient-norm clip; <= 0 disables.
  double clip_norm = 1.0;
};

template <typename T>
class Adam {
 public:
  Adam(ParameterRefs<T> params, AdamOptions options);

  // Applies one update from the accumulated gradients. Returns the
  // gradient norm before clipping.
  double Step();

  const AdamOptions& options() const { return options_; }

 private:
  ParameterRefs<T> params_;
  AdamOptions options_;
  std::vector<Matrix<T>> first_;
  std::vector<Matrix<T>> second_;
  long step_ = 0;
};

template <typename T>
double GradientNorm(const ParameterRefs<T>& params);

}  // namespace invlab::nn

#endif  // INVLAB_NN_OPTIMIZER_H_
