// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "multinet/tensor.hpp"

namespace multinet {

enum class LossForm {
  kCategorical,  // mean_b −Σᵢ yᵢ log σ(z)ᵢ
  kEq3Literal,   // mean_b −Σᵢ [yᵢ log ŷᵢ + (1−yᵢ) log(1−ŷᵢ)], ŷ = σ(z) clamped
};

enum class DistillMode { kOff, kHard, kSoft };

LossForm parse_loss_form(const std::string& name);
std::string to_string(LossForm form);
/// "off", "hard", "soft" or "soft:<temperature>".
DistillMode parse_distill_mode(const std::string& name, double* temperature = nullptr);
std::string to_string(DistillMode mode);

/// Throws ShapeError unless every row holds exactly one 1 and zeros elsewhere.
template <typename T>
void check_one_hot(const Tensor<T>& target);

template <typename T>
Tensor<T> one_hot(const std::vector<std::size_t>& labels, std::size_t k);

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, const Tensor<T>& target, LossForm form = LossForm::kCategorical);

/// Row-wise argmax as a one-hot matrix (first maximum on ties).
template <typename T>
Tensor<T> argmax_one_hot(const Tensor<T>& logits);

/// mean_b Σᵢ pᵢ (log pᵢ − log qᵢ), p = σ(teacher/τ), q = σ(student/τ). Gradient flows to the student only.
template <typename T>
Tensor<T> kl_divergence(const Tensor<T>& teacher_logits, const Tensor<T>& student_logits, double temperature);

template <typename T>
struct DistillationLoss {
  Tensor<T> total;
  Tensor<T> class_term;    // CE(class_logits, target)
  Tensor<T> distill_term;  // hard: CE(distill, argmax teacher); soft: τ²·KL
};

/// Throws ConfigError when the teacher is missing or mode is off.
template <typename T>
DistillationLoss<T> distillation_loss(const Tensor<T>& class_logits, const Tensor<T>& distill_logits,
                                      const Tensor<T>& target, const Tensor<T>& teacher_logits, DistillMode mode,
                                      double temperature = 3.0, LossForm form = LossForm::kCategorical);

}  // namespace multinet
