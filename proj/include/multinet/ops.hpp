// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "multinet/tensor.hpp"

namespace multinet {

// Elementwise arithmetic with right-aligned broadcasting: extents are compared
// from the trailing dimension and must be equal or 1.

template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b);

template <typename T> Tensor<T> add(const Tensor<T>& a, T b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, T b);
template <typename T> Tensor<T> neg(const Tensor<T>& a);

template <typename T> Tensor<T> exp(const Tensor<T>& a);
template <typename T> Tensor<T> log(const Tensor<T>& a);
/// Values clipped to [lo, hi]; the gradient is zero where clipping is active.
template <typename T> Tensor<T> clamp(const Tensor<T>& a, T lo, T hi);

Shape broadcast_shape(const Shape& a, const Shape& b);

/// Sum of all elements as a 0-d tensor.
template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);
/// Sum along `axis`, removing it.
template <typename T> Tensor<T> sum_axis(const Tensor<T>& a, std::size_t axis);

/// (m,k)·(k,n). Backward: dA = dC·Bᵀ, dB = Aᵀ·dC.
template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
/// Batched (B,m,k)·(B,k,n), or (B,m,k)·(B,n,k)ᵀ when `transpose_b`.
template <typename T>
Tensor<T> bmm(const Tensor<T>& a, const Tensor<T>& b, bool transpose_b = false);
/// x[..., in]·Wᵀ + bias with W of shape (out, in). `bias` may be undefined.
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

template <typename T> Tensor<T> reshape(const Tensor<T>& a, Shape shape);
template <typename T> Tensor<T> permute(const Tensor<T>& a, const std::vector<std::size_t>& order);
/// Swaps two axes.
template <typename T> Tensor<T> transpose(const Tensor<T>& a, std::size_t axis0, std::size_t axis1);
template <typename T> Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis);
/// `length` consecutive entries along `axis` starting at `start`.
template <typename T>
Tensor<T> slice(const Tensor<T>& a, std::size_t axis, std::size_t start, std::size_t length);
/// Repeats a tensor with leading extent 1 `count` times along axis 0.
template <typename T> Tensor<T> repeat_batch(const Tensor<T>& a, std::size_t count);

}  // namespace multinet
