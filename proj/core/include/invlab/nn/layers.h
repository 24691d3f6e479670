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

// Layers with hand-written backward passes. Forward() is const and takes an
// optional cache; Backward() consumes that cache, accumulates parameter
// gradients and returns the gradient with respect to the layer input.
// Passing a null cache gives a read-only forward that is safe to call from
// several threads.

#ifndef INVLAB_NN_LAYERS_H_
#define INVLAB_NN_LAYERS_H_

#include <span>
#include <string>
#include <vector>

#include "invlab/nn/tensor.h"

namespace invlab::nn {

// Rows of a padded sequence batch: sequence b occupies rows
// [b * max_len, b * max_len + lengths[b]); the remainder is padding.
struct SequenceLayout {
  int batch = 0;
  int max_len = 0;
  std::vector<int> lengths;

  int rows() const { return batch * max_len; }
};

template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, int in, int out);

  Matrix<T> Forward(const Matrix<T>& x) const;
  // `x` is the input seen by the matching Forward().
  Matrix<T> Backward(const Matrix<T>& x, const Matrix<T>& dy);

  void Collect(ParameterRefs<T>& out) { out.push_back(&weight); out.push_back(&bias); }

  Parameter<T> weight;  // in x out
  Parameter<T> bias;    // 1 x out
};

template <typename T>
class LayerNorm {
 public:
  struct Cache {
    Matrix<T> normalized;
    Matrix<T> inv_std;  // rows x 1
  };

  LayerNorm() = default;
  LayerNorm(const std::string& name, int width);

  Matrix<T> Forward(const Matrix<T>& x, Cache* cache) const;
  Matrix<T> Backward(const Cache& cache, const Matrix<T>& dy);

  void Collect(ParameterRefs<T>& out) { out.push_back(&gain); out.push_back(&shift); }

  Parameter<T> gain;
  Parameter<T> shift;
  static constexpr double kEpsilon = 1e-5;
};

// Tanh approximation of GELU, elementwise.
template <typename T>
Matrix<T> Gelu(const Matrix<T>& x);
template <typename T>
Matrix<T> GeluBackward(const Matrix<T>& x, const Matrix<T>& dy);

// Multi-head self-attention over a padded batch. Each query row attends
// only to valid rows of its own sequence, and with `causal` set only to
// rows at or before itself.
template <typename T>
class SelfAttention {
 public:
  struct Cache {
    Matrix<T> input;
    Matrix<T> qkv;
    Matrix<T> context;
    std::vector<Matrix<T>> probs;  // batch * heads, each len x len
  };

  SelfAttention() = default;
  SelfAttention(const std::string& name, int width, int heads, bool causal);

  Matrix<T> Forward(const Matrix<T>& x, const SequenceLayout& layout,
                    Cache* cache) const;
  Matrix<T> Backward(const Cache& cache, const SequenceLayout& layout,
                     const Matrix<T>& dy);

  void Collect(ParameterRefs<T>& out) { qkv_.Collect(out); proj_.Collect(out); }

  int width() const { return width_; }
  int heads() const { return heads_; }
  bool causal() const { return causal_; }

 private:
  int width_ = 0;
  int heads_ = 1;
  bool causal_ = true;
  Linear<T> qkv_;
  Linear<T> proj_;
};

// Pre-norm transformer block: x + Attn(LN(x)), then x + MLP(LN(x)).
template <typename T>
class TransformerBlock {
 public:
  struct Cache {
    typename LayerNorm<T>::Cache ln1;
    Matrix<T> ln1_out;
    typename SelfAttention<T>::Cache attn;
    typename LayerNorm<T>::Cache ln2;
    Matrix<T> ln2_out;
    Matrix<T> hidden_pre;
    Matrix<T> hidden_act;
  };

  TransformerBlock() = default;
  TransformerBlock(const std::string& name, int width, int heads, bool causal);

  Matrix<T> Forward(const Matrix<T>& x, const SequenceLayout& layout,
                    Cache* cache) const;
  Matrix<T> Backward(const Cache& cache, const SequenceLayout& layout,
                     const Matrix<T>& dy);

  void Collect(ParameterRefs<T>& out);

  SelfAttention<T>& attention() { return attn_; }

 private:
  LayerNorm<T> ln1_;
  SelfAttention<T> attn_;
  LayerNorm<T> ln2_;
  Linear<T> fc1_;
  Linear<T> fc2_;
};

// Gated recurrent unit with the r/z/n gate convention, h0 = 0.
template <typename T>
class Gru {
 public:
  struct Step {
    Matrix<T> h_prev;
    Matrix<T> reset;
    Matrix<T> update;
    Matrix<T> candidate;
    Matrix<T> hidden_n;  // h_prev * W_hn + b_hn
  };

  Gru() = default;
  Gru(const std::string& name, int input, int hidden);

  // Input-side gate pre-activations, shared by every step when the input is
  // the same at each step.
  Matrix<T> InputGates(const Matrix<T>& x) const;
  // One recurrence step. `step` may be null.
  Matrix<T> StepForward(const Matrix<T>& input_gates, const Matrix<T>& h_prev,
                        Step* step) const;
  // Returns dL/dh_prev; adds the input-gate gradient into `d_input_gates`.
  Matrix<T> StepBackward(const Step& step, const Matrix<T>& dh,
                         Matrix<T>& d_input_gates);
  // Finishes the input side once all steps are done.
  Matrix<T> InputBackward(const Matrix<T>& x, const Matrix<T>& d_input_gates);

  void Collect(ParameterRefs<T>& out);

  int hidden() const { return hidden_; }

 private:
  int hidden_ = 0;
  Linear<T> input_;      // in -> 3h, [r | z | n]
  Linear<T> recurrent_;  // h -> 3h
};

// Row-wise log-softmax.
template <typename T>
Matrix<T> LogSoftmaxRows(const Matrix<T>& logits);

}  // namespace invlab::nn

#endif  // INVLAB_NN_LAYERS_H_
