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

#ifndef INVLAB_NN_TENSOR_H_
#define INVLAB_NN_TENSOR_H_

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "invlab/rng.h"

namespace invlab::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

// A trainable tensor and its accumulated gradient.
template <typename T>
struct Parameter {
  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)),
        value(Matrix<T>::Zero(rows, cols)),
        grad(Matrix<T>::Zero(rows, cols)) {}

  std::string name;
  Matrix<T> value;
  Matrix<T> grad;

  void ZeroGrad() { grad.setZero(); }
};

template <typename T>
using ParameterRefs = std::vector<Parameter<T>*>;

template <typename T>
void InitUniform(Parameter<T>& p, Rng& rng, double lo, double hi) {
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    p.value.data()[i] = static_cast<T>(rng.Uniform(lo, hi));
  }
}

template <typename T>
void InitNormal(Parameter<T>& p, Rng& rng, double stddev) {
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    p.value.data()[i] = static_cast<T>(rng.Normal(0.0, stddev));
  }
}

template <typename T>
void ZeroGrads(const ParameterRefs<T>& params) {
  for (auto* p : params) p->ZeroGrad();
}

// Flat copy of every parameter value, for best-epoch snapshots.
template <typename T>
std::vector<Matrix<T>> Snapshot(const ParameterRefs<T>& params) {
  std::vector<Matrix<T>> out;
  out.reserve(params.size());
  for (auto* p : params) out.push_back(p->value);
  return out;
}

template <typename T>
void Restore(const ParameterRefs<T>& params,
             const std::vector<Matrix<T>>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace invlab::nn

#endif  // INVLAB_NN_TENSOR_H_
