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

#include "invlab/nn/layers.h"

#include <cmath>

#include "invlab/error.h"

namespace invlab::nn {

/* Linear */

template <typename T>
Linear<T>::Linear(const std::string& name, int in, int out)
    : weight(name + ".weight", in, out), bias(name + ".bias", 1, out) {}

template <typename T>
Matrix<T> Linear<T>::Forward(const Matrix<T>& x) const {
  Matrix<T> y(x.rows(), weight.value.cols());
  y.noalias() = x * weight.value;
  y.rowwise() += bias.value.row(0);
  return y;
}

template <typename T>
Matrix<T> Linear<T>::Backward(const Matrix<T>& x, const Matrix<T>& dy) {
  weight.grad.noalias() += x.transpose() * dy;
  bias.grad += dy.colwise().sum();
  Matrix<T> dx(dy.rows(), weight.value.rows());
  dx.noalias() = dy * weight.value.transpose();
  return dx;
}

/* LayerNorm */

template <typename T>
LayerNorm<T>::LayerNorm(const std::string& name, int width)
    : gain(name + ".gain", 1, width), shift(name + ".shift", 1, width) {
  gain.value.setOnes();
}

template <typename T>
Matrix<T> LayerNorm<T>::Forward(const Matrix<T>& x, Cache* cache) const {
  const Eigen::Index n = x.cols();
  Matrix<T> normalized(x.rows(), n);
  Matrix<T> inv_std(x.rows(), 1);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const T mean = x.row(r).mean();
    auto centered = x.row(r).array() - mean;
    const T var = centered.square().sum() / static_cast<T>(n);
    const T inv = T(1) / std::sqrt(var + static_cast<T>(kEpsilon));
    normalized.row(r) = centered * inv;
    inv_std(r, 0) = inv;
  }
  Matrix<T> y = (normalized.array().rowwise() * gain.value.row(0).array())
                    .rowwise() +
                shift.value.row(0).array();
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

template <typename T>
Matrix<T> LayerNorm<T>::Backward(const Cache& cache, const Matrix<T>& dy) {
  const auto& xhat = cache.normalized;
  gain.grad += (dy.array() * xhat.array()).colwise().sum().matrix();
  shift.grad += dy.colwise().sum();
  Matrix<T> dxhat = dy.array().rowwise() * gain.value.row(0).array();
  const T n = static_cast<T>(dy.cols());
  Matrix<T> dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const T sum = dxhat.row(r).sum();
    const T dot = dxhat.row(r).dot(xhat.row(r));
    dx.row(r) = (cache.inv_std(r, 0) / n) *
                (n * dxhat.row(r).array() - sum - xhat.row(r).array() * dot);
  }
  return dx;
}

/* GELU */

namespace {
constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluCubic = 0.044715;
}  // namespace

template <typename T>
Matrix<T> Gelu(const Matrix<T>& x) {
  return x.unaryExpr([](T v) {
    const T inner = static_cast<T>(kGeluScale) *
                    (v + static_cast<T>(kGeluCubic) * v * v * v);
    return static_cast<T>(0.5) * v * (T(1) + std::tanh(inner));
  });
}

template <typename T>
Matrix<T> GeluBackward(const Matrix<T>& x, const Matrix<T>& dy) {
  Matrix<T> grad = x.unaryExpr([](T v) {
    const T inner = static_cast<T>(kGeluScale) *
                    (v + static_cast<T>(kGeluCubic) * v * v * v);
    const T t = std::tanh(inner);
    const T dinner = static_cast<T>(kGeluScale) *
                     (T(1) + static_cast<T>(3 * kGeluCubic) * v * v);
    return static_cast<T>(0.5) * (T(1) + t) +
           static_cast<T>(0.5) * v * (T(1) - t * t) * dinner;
  });
  return grad.cwiseProduct(dy);
}

/* SelfAttention */

template <typename T>
SelfAttention<T>::SelfAttention(const std::string& name, int width, int heads,
                                bool causal)
    : width_(width),
      heads_(heads),
      causal_(causal),
      qkv_(name + ".qkv", width, 3 * width),
      proj_(name + ".proj", width, width) {
  if (heads <= 0 || width % heads != 0) {
    throw InvalidArgument("attention width must be divisible by head count");
  }
}

template <typename T>
Matrix<T> SelfAttention<T>::Forward(const Matrix<T>& x,
                                    const SequenceLayout& layout,
                                    Cache* cache) const {
  const int dh = width_ / heads_;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  Matrix<T> qkv = qkv_.Forward(x);
  Matrix<T> context = Matrix<T>::Zero(x.rows(), width_);
  if (cache) {
    cache->probs.assign(static_cast<std::size_t>(layout.batch) * heads_,
                        Matrix<T>());
  }
  for (int b = 0; b < layout.batch; ++b) {
    const int len = layout.lengths[b];
    if (len == 0) continue;
    const Eigen::Index r0 = static_cast<Eigen::Index>(b) * layout.max_len;
    for (int h = 0; h < heads_; ++h) {
      auto q = qkv.block(r0, h * dh, len, dh);
      auto k = qkv.block(r0, width_ + h * dh, len, dh);
      auto v = qkv.block(r0, 2 * width_ + h * dh, len, dh);
      Matrix<T> p(len, len);
      p.noalias() = q * k.transpose();
      for (int i = 0; i < len; ++i) {
        const int visible = causal_ ? i + 1 : len;
        auto row = p.row(i);
        const T m = (row.head(visible) * scale).maxCoeff();
        T sum = 0;
        for (int j = 0; j < visible; ++j) {
          row(j) = std::exp(row(j) * scale - m);
          sum += row(j);
        }
        for (int j = 0; j < visible; ++j) row(j) /= sum;
        for (int j = visible; j < len; ++j) row(j) = 0;
      }
      context.block(r0, h * dh, len, dh).noalias() = p * v;
      if (cache) cache->probs[static_cast<std::size_t>(b) * heads_ + h] = std::move(p);
    }
  }
  Matrix<T> out = proj_.Forward(context);
  if (cache) {
    cache->input = x;
    cache->qkv = std::move(qkv);
    cache->context = std::move(context);
  }
  return out;
}

template <typename T>
Matrix<T> SelfAttention<T>::Backward(const Cache& cache,
                                     const SequenceLayout& layout,
                                     const Matrix<T>& dy) {
  const int dh = width_ / heads_;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  Matrix<T> dcontext = proj_.Backward(cache.context, dy);
  Matrix<T> dqkv = Matrix<T>::Zero(cache.qkv.rows(), cache.qkv.cols());
  for (int b = 0; b < layout.batch; ++b) {
    const int len = layout.lengths[b];
    if (len == 0) continue;
    const Eigen::Index r0 = static_cast<Eigen::Index>(b) * layout.max_len;
    for (int h = 0; h < heads_; ++h) {
      const Matrix<T>& p = cache.probs[static_cast<std::size_t>(b) * heads_ + h];
      auto q = cache.qkv.block(r0, h * dh, len, dh);
      auto k = cache.qkv.block(r0, width_ + h * dh, len, dh);
      auto v = cache.qkv.block(r0, 2 * width_ + h * dh, len, dh);
      auto dout = dcontext.block(r0, h * dh, len, dh);

      dqkv.block(r0, 2 * width_ + h * dh, len, dh).noalias() =
          p.transpose() * dout;
      Matrix<T> dp(len, len);
      dp.noalias() = dout * v.transpose();
      for (int i = 0; i < len; ++i) {
        const T dot = p.row(i).dot(dp.row(i));
        dp.row(i) = p.row(i).cwiseProduct(
            (dp.row(i).array() - dot).matrix());
      }
      dp *= scale;
      dqkv.block(r0, h * dh, len, dh).noalias() = dp * k;
      dqkv.block(r0, width_ + h * dh, len, dh).noalias() = dp.transpose() * q;
    }
  }
  return qkv_.Backward(cache.input, dqkv);
}

/* TransformerBlock */

template <typename T>
TransformerBlock<T>::TransformerBlock(const std::string& name, int width,
                                      int heads, bool causal)
    : ln1_(name + ".ln1", width),
      attn_(name + ".attn", width, heads, causal),
      ln2_(name + ".ln2", width),
      fc1_(name + ".fc1", width, 4 * width),
      fc2_(name + ".fc2", 4 * width, width) {}

template <typename T>
Matrix<T> TransformerBlock<T>::Forward(const Matrix<T>& x,
                                       const SequenceLayout& layout,
                                       Cache* cache) const {
  typename LayerNorm<T>::Cache* ln1_cache = cache ? &cache->ln1 : nullptr;
  typename LayerNorm<T>::Cache* ln2_cache = cache ? &cache->ln2 : nullptr;
  typename SelfAttention<T>::Cache* attn_cache = cache ? &cache->attn : nullptr;

  Matrix<T> a = ln1_.Forward(x, ln1_cache);
  Matrix<T> mid = x + attn_.Forward(a, layout, attn_cache);
  Matrix<T> c = ln2_.Forward(mid, ln2_cache);
  Matrix<T> pre = fc1_.Forward(c);
  Matrix<T> act = Gelu(pre);
  Matrix<T> out = mid + fc2_.Forward(act);
  if (cache) {
    cache->ln1_out = std::move(a);
    cache->ln2_out = std::move(c);
    cache->hidden_pre = std::move(pre);
    cache->hidden_act = std::move(act);
  }
  return out;
}

template <typename T>
Matrix<T> TransformerBlock<T>::Backward(const Cache& cache,
                                        const SequenceLayout& layout,
                                        const Matrix<T>& dy) {
  Matrix<T> dact = fc2_.Backward(cache.hidden_act, dy);
  Matrix<T> dpre = GeluBackward(cache.hidden_pre, dact);
  Matrix<T> dc = fc1_.Backward(cache.ln2_out, dpre);
  Matrix<T> dmid = dy + ln2_.Backward(cache.ln2, dc);
  Matrix<T> da = attn_.Backward(cache.attn, layout, dmid);
  return dmid + ln1_.Backward(cache.ln1, da);
}

template <typename T>
void TransformerBlock<T>::Collect(ParameterRefs<T>& out) {
  ln1_.Collect(out);
  attn_.Collect(out);
  ln2_.Collect(out);
  fc1_.Collect(out);
  fc2_.Collect(out);
}

/* Gru */

template <typename T>
Gru<T>::Gru(const std::string& name, int input, int hidden)
    : hidden_(hidden),
      input_(name + ".input", input, 3 * hidden),
      recurrent_(name + ".recurrent", hidden, 3 * hidden) {}

template <typename T>
Matrix<T> Gru<T>::InputGates(const Matrix<T>& x) const {
  return input_.Forward(x);
}

namespace {
template <typename T>
T Sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}
}  // namespace

template <typename T>
Matrix<T> Gru<T>::StepForward(const Matrix<T>& input_gates,
                              const Matrix<T>& h_prev, Step* step) const {
  const int hd = hidden_;
  const Eigen::Index rows = h_prev.rows();
  Matrix<T> gh = recurrent_.Forward(h_prev);
  Matrix<T> r = (input_gates.leftCols(hd) + gh.leftCols(hd))
                    .unaryExpr([](T v) { return Sigmoid(v); });
  Matrix<T> z = (input_gates.middleCols(hd, hd) + gh.middleCols(hd, hd))
                    .unaryExpr([](T v) { return Sigmoid(v); });
  Matrix<T> hn = gh.rightCols(hd);
  Matrix<T> n = (input_gates.rightCols(hd).array() + r.array() * hn.array())
                    .tanh()
                    .matrix();
  Matrix<T> h(rows, hd);
  h.array() = (T(1) - z.array()) * n.array() + z.array() * h_prev.array();
  if (step) {
    step->h_prev = h_prev;
    step->reset = std::move(r);
    step->update = std::move(z);
    step->candidate = std::move(n);
    step->hidden_n = std::move(hn);
  }
  return h;
}

template <typename T>
Matrix<T> Gru<T>::StepBackward(const Step& step, const Matrix<T>& dh,
                               Matrix<T>& d_input_gates) {
  const int hd = hidden_;
  const auto& r = step.reset.array();
  const auto& z = step.update.array();
  const auto& n = step.candidate.array();
  Matrix<T> dh_prev = (dh.array() * z).matrix();
  Matrix<T> dn_pre = (dh.array() * (T(1) - z) * (T(1) - n * n)).matrix();
  Matrix<T> dz_pre =
      (dh.array() * (step.h_prev.array() - n) * z * (T(1) - z)).matrix();
  Matrix<T> dr_pre =
      (dn_pre.array() * step.hidden_n.array() * r * (T(1) - r)).matrix();

  Matrix<T> dgh(dh.rows(), 3 * hd);
  dgh.leftCols(hd) = dr_pre;
  dgh.middleCols(hd, hd) = dz_pre;
  dgh.rightCols(hd) = (dn_pre.array() * r).matrix();

  d_input_gates.leftCols(hd) += dr_pre;
  d_input_gates.middleCols(hd, hd) += dz_pre;
  d_input_gates.rightCols(hd) += dn_pre;

  dh_prev += recurrent_.Backward(step.h_prev, dgh);
  return dh_prev;
}

template <typename T>
Matrix<T> Gru<T>::InputBackward(const Matrix<T>& x,
                                const Matrix<T>& d_input_gates) {
  return input_.Backward(x, d_input_gates);
}

template <typename T>
void Gru<T>::Collect(ParameterRefs<T>& out) {
  input_.Collect(out);
  recurrent_.Collect(out);
}

template <typename T>
Matrix<T> LogSoftmaxRows(const Matrix<T>& logits) {
  Matrix<T> out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const T m = logits.row(r).maxCoeff();
    const T lse = m + std::log((logits.row(r).array() - m).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

#define INVLAB_INSTANTIATE(T)                                               \
  template class Linear<T>;                                                 \
  template class LayerNorm<T>;                                              \
  template class SelfAttention<T>;                                          \
  template class TransformerBlock<T>;                                       \
  template class Gru<T>;                                                    \
  template Matrix<T> Gelu<T>(const Matrix<T>&);                             \
  template Matrix<T> GeluBackward<T>(const Matrix<T>&, const Matrix<T>&);   \
  template Matrix<T> LogSoftmaxRows<T>(const Matrix<T>&);

INVLAB_INSTANTIATE(float)
INVLAB_INSTANTIATE(double)
#undef INVLAB_INSTANTIATE

}  // namespace invlab::nn
