// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include "multinet/module.hpp"
#include "multinet/tensor.hpp"

namespace multinet {

template <typename T>
struct ModelOutput {
  Tensor<T> features;        // (B, feature_dim), the vector joined by ⊕ fusion
  Tensor<T> logits;          // (B, K)
  Tensor<T> distill_logits;  // (B, K) when the model carries a distillation head
};

/// Common surface of every branch and of fused models.
template <typename T>
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ModelOutput<T> forward(const Tensor<T>& x, const ForwardContext& ctx) const = 0;
  virtual void collect(const std::string& prefix, ParameterList<T>& out) const = 0;
  virtual std::size_t feature_dim() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual std::string kind() const = 0;

  ParameterList<T> parameters() const {
    ParameterList<T> out;
    collect("", out);
    return out;
  }
};

/// Class probabilities used for prediction: softmax of the logits, or the mean
/// of both head softmaxes when a distillation head is present.
template <typename T>
Tensor<T> predict_proba(const ModelOutput<T>& out);

}  // namespace multinet
