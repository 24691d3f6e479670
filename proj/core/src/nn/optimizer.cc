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

#include "invlab/nn/optimizer.h"

#include <cmath>

namespace invlab::nn {

template <typename T>
double GradientNorm(const ParameterRefs<T>& params) {
  double sq = 0;
  for (auto* p : params) {
    sq += p->grad.template cast<double>().squaredNorm();
  }
  return std::sqrt(sq);
}

template <typename T>
Adam<T>::Adam(ParameterRefs<T> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (auto* p : params_) {
    first_.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
    second_.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
  }
}

template <typename T>
double Adam<T>::Step() {
  const double norm = GradientNorm(params_);
  T grad_scale = 1;
  if (options_.clip_norm > 0 && norm > options_.clip_norm) {
    grad_scale = static_cast<T>(options_.clip_norm / norm);
  }
  ++step_;
  const T b1 = static_cast<T>(options_.beta1);
  const T b2 = static_cast<T>(options_.beta2);
  const T correction1 =
      static_cast<T>(1.0 - std::pow(options_.beta1, static_cast<double>(step_)));
  const T correction2 =
      static_cast<T>(1.0 - std::pow(options_.beta2, static_cast<double>(step_)));
  const T lr = static_cast<T>(options_.learning_rate);
  const T eps = static_cast<T>(options_.epsilon);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto g = params_[i]->grad.array() * grad_scale;
    first_[i].array() = b1 * first_[i].array() + (T(1) - b1) * g;
    second_[i].array() = b2 * second_[i].array() + (T(1) - b2) * g * g;
    params_[i]->value.array() -=
        lr * (first_[i].array() / correction1) /
        ((second_[i].array() / correction2).sqrt() + eps);
  }
  return norm;
}

template class Adam<float>;
template class Adam<double>;
template double GradientNorm<float>(const ParameterRefs<float>&);
template double GradientNorm<double>(const ParameterRefs<double>&);

}  // namespace invlab::nn
