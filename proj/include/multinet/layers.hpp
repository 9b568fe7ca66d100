// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <random>

#include "multinet/module.hpp"
#include "multinet/ops.hpp"
#include "multinet/tensor.hpp"

namespace multinet {

enum class Padding { kSame, kValid };

// ---------------------------------------------------------------------------
// Functional forms. All are differentiable with respect to every tensor input.
// ---------------------------------------------------------------------------

template <typename T> Tensor<T> relu(const Tensor<T>& x);
/// Exact (erf) GELU.
template <typename T> Tensor<T> gelu(const Tensor<T>& x);

/// Softmax over the last axis, computed after subtracting the row maximum.
template <typename T> Tensor<T> softmax(const Tensor<T>& x);
template <typename T> Tensor<T> log_softmax(const Tensor<T>& x);

/// Normalizes each row of the last axis to zero mean and unit variance, then
/// applies `gamma`·x̂ + `beta`.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     T eps = T(1e-6));

/// Inverted dropout. Identity (the same handle) in eval mode or when rate is 0.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, const ForwardContext& ctx);

/// x[B,C,H,W] * weight[O,C,kh,kw] + bias[O]. "Same" padding follows the
/// ceil(H/stride) convention with the extra row/column of padding at the end.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 std::size_t stride, Padding padding);

/// Max over k×k windows. Backward routes each gradient to the first maximum in
/// row-major window order.
template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& x, std::size_t kernel, std::size_t stride);

/// Average pooling onto an out_h×out_w grid with bins [⌊i·H/out⌋, ⌈(i+1)·H/out⌉).
template <typename T>
Tensor<T> adaptive_avg_pool2d(const Tensor<T>& x, std::size_t out_h, std::size_t out_w);

// ---------------------------------------------------------------------------
// Parameterized layers.
// ---------------------------------------------------------------------------

template <typename T>
struct Linear {
  Tensor<T> weight;  // (out, in)
  Tensor<T> bias;    // (out)

  /// Kaiming-uniform over fan-in for the weight, zero bias.
  static Linear init(std::size_t in, std::size_t out, std::mt19937_64& rng);

  std::size_t in_features() const { return weight.extent(1); }
  std::size_t out_features() const { return weight.extent(0); }
  Tensor<T> forward(const Tensor<T>& x) const { return linear(x, weight, bias); }
  void collect(const std::string& prefix, ParameterList<T>& out) const;
};

template <typename T>
struct Conv2d {
  Tensor<T> weight;  // (out_ch, in_ch, kh, kw)
  Tensor<T> bias;    // (out_ch)
  std::size_t stride = 1;
  Padding padding = Padding::kSame;

  static Conv2d init(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
                     std::size_t stride, Padding padding, std::mt19937_64& rng);

  std::size_t in_channels() const { return weight.extent(1); }
  std::size_t out_channels() const { return weight.extent(0); }
  Tensor<T> forward(const Tensor<T>& x) const { return conv2d(x, weight, bias, stride, padding); }
  void collect(const std::string& prefix, ParameterList<T>& out) const;
};

template <typename T>
struct LayerNorm {
  Tensor<T> gamma;
  Tensor<T> beta;
  T eps = T(1e-6);

  static LayerNorm init(std::size_t features);
  Tensor<T> forward(const Tensor<T>& x) const { return layer_norm(x, gamma, beta, eps); }
  void collect(const std::string& prefix, ParameterList<T>& out) const;
};

struct Dropout {
  double rate = 0.1;

  explicit Dropout(double rate = 0.1);
  template <typename T>
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext& ctx) const {
    return dropout(x, rate, ctx);
  }
};

/// Spatial output extent of a convolution or pooling window along one axis.
std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride,
                               Padding padding);

}  // namespace multinet
