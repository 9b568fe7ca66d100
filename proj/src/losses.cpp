// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include "multinet/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "multinet/errors.hpp"
#include "multinet/layers.hpp"
#include "multinet/ops.hpp"

namespace multinet {

LossForm parse_loss_form(const std::string& name) {
  if (name == "categorical") return LossForm::kCategorical;
  if (name == "eq3-literal" || name == "eq3_literal" || name == "binary-sum") return LossForm::kEq3Literal;
  throw ConfigError("unknown loss form '" + name + "' (known: categorical, eq3-literal)");
}

std::string to_string(LossForm form) { return form == LossForm::kCategorical ? "categorical" : "eq3-literal"; }

DistillMode parse_distill_mode(const std::string& name, double* temperature) {
  if (name == "off" || name == "none") return DistillMode::kOff;
  if (name == "hard") return DistillMode::kHard;
  if (name.rfind("soft", 0) == 0) {
    if (name.size() > 4) {
      if (name[4] != ':' && name[4] != '=') throw ConfigError("distillation mode '" + name + "' is malformed");
      double t = 0.0;
      try {
        t = std::stod(name.substr(5));
      } catch (const std::exception&) {
        throw ConfigError("distillation temperature in '" + name + "' is not a number");
      }
      if (!(t > 0.0)) throw ConfigError("distillation temperature must be positive");
      if (temperature) *temperature = t;
    }
    return DistillMode::kSoft;
  }
  throw ConfigError("unknown distillation mode '" + name + "' (known: off, hard, soft, soft:<T>)");
}

std::string to_string(DistillMode mode) {
  switch (mode) {
    case DistillMode::kOff: return "off";
    case DistillMode::kHard: return "hard";
    case DistillMode::kSoft: return "soft";
  }
  return "off";
}

template <typename T>
void check_one_hot(const Tensor<T>& target) {
  if (target.dim() != 2) throw ShapeError("target must be (B,K), got " + shape_str(target.shape()));
  const std::size_t b = target.extent(0), k = target.extent(1);
  auto v = target.data();
  for (std::size_t i = 0; i < b; ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const T x = v[i * k + j];
      if (x == T(1)) {
        ++ones;
      } else if (x != T(0)) {
        throw ShapeError("target row " + std::to_string(i) + " is not one-hot");
      }
    }
    if (ones != 1) throw ShapeError("target row " + std::to_string(i) + " is not one-hot");
  }
}

template <typename T>
Tensor<T> one_hot(const std::vector<std::size_t>& labels, std::size_t k) {
  Tensor<T> out = Tensor<T>::zeros({labels.size(), k});
  auto v = out.data();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= k) throw ShapeError("label " + std::to_string(labels[i]) + " out of range for K=" + std::to_string(k));
    v[i * k + labels[i]] = T(1);
  }
  return out;
}

namespace {

template <typename T>
void check_logits(const Tensor<T>& logits, const Tensor<T>& target) {
  if (logits.dim() != 2) throw ShapeError("logits must be (B,K), got " + shape_str(logits.shape()));
  if (logits.extent(1) < 2) throw ShapeError("cross-entropy needs K >= 2");
  if (target.shape() != logits.shape()) {
    throw ShapeError("target " + shape_str(target.shape()) + " does not match logits " + shape_str(logits.shape()));
  }
  check_one_hot(target);
}

}  // namespace

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, const Tensor<T>& target, LossForm form) {
  check_logits(logits, target);
  const T inv_batch = T(1) / static_cast<T>(logits.extent(0));
  if (form == LossForm::kCategorical) {
    return mul(sum(mul(target, log_softmax(logits))), -inv_batch);
  }
  // 1 − 1e-12 rounds to 1 in single precision; keep the upper clamp strictly below 1.
  const T lo = T(1e-12);
  const T hi = std::min(T(1) - T(1e-12), std::nextafter(T(1), T(0)));
  auto p = clamp(softmax(logits), lo, hi);
  auto positive = mul(target, log(p));
  auto negative = mul(add(neg(target), T(1)), log(add(neg(p), T(1))));
  return mul(sum(add(positive, negative)), -inv_batch);
}

template <typename T>
Tensor<T> argmax_one_hot(const Tensor<T>& logits) {
  if (logits.dim() != 2) throw ShapeError("argmax_one_hot expects (B,K), got " + shape_str(logits.shape()));
  const std::size_t b = logits.extent(0), k = logits.extent(1);
  auto v = logits.data();
  std::vector<std::size_t> labels(b);
  for (std::size_t i = 0; i < b; ++i) {
    labels[i] = static_cast<std::size_t>(std::max_element(v.begin() + i * k, v.begin() + (i + 1) * k) -
                                         (v.begin() + i * k));
  }
  return one_hot<T>(labels, k);
}

template <typename T>
Tensor<T> kl_divergence(const Tensor<T>& teacher_logits, const Tensor<T>& student_logits, double temperature) {
  if (teacher_logits.shape() != student_logits.shape() || student_logits.dim() != 2) {
    throw ShapeError("teacher logits " + shape_str(teacher_logits.shape()) + " do not match student logits " +
                     shape_str(student_logits.shape()));
  }
  if (!(temperature > 0.0)) throw ConfigError("distillation temperature must be positive");
  const T inv_tau = T(1) / static_cast<T>(temperature);
  auto log_p = log_softmax(mul(teacher_logits.detach(), inv_tau));
  auto p = exp(log_p);
  auto log_q = log_softmax(mul(student_logits, inv_tau));
  const T inv_batch = T(1) / static_cast<T>(student_logits.extent(0));
  return mul(sum(mul(p, sub(log_p, log_q))), inv_batch);
}

template <typename T>
DistillationLoss<T> distillation_loss(const Tensor<T>& class_logits, const Tensor<T>& distill_logits,
                                      const Tensor<T>& target, const Tensor<T>& teacher_logits, DistillMode mode,
                                      double temperature, LossForm form) {
  if (mode == DistillMode::kOff) throw ConfigError("distillation_loss called with distillation off");
  if (!teacher_logits.defined()) throw ConfigError("distillation needs teacher logits");
  if (!distill_logits.defined()) throw ConfigError("distillation needs a model with a distillation head");
  if (teacher_logits.shape() != class_logits.shape()) {
    throw ShapeError("teacher logits " + shape_str(teacher_logits.shape()) + " must be " +
                     shape_str(class_logits.shape()));
  }
  DistillationLoss<T> out;
  out.class_term = cross_entropy(class_logits, target, form);
  if (mode == DistillMode::kHard) {
    out.distill_term = cross_entropy(distill_logits, argmax_one_hot(teacher_logits), form);
  } else {
    const T scale = static_cast<T>(temperature * temperature);
    out.distill_term = mul(kl_divergence(teacher_logits, distill_logits, temperature), scale);
  }
  out.total = add(out.class_term, out.distill_term);
  return out;
}

#define MULTINET_INSTANTIATE_LOSSES(T)                                                                         \
  template void check_one_hot(const Tensor<T>&);                                                               \
  template Tensor<T> one_hot<T>(const std::vector<std::size_t>&, std::size_t);                                 \
  template Tensor<T> cross_entropy(const Tensor<T>&, const Tensor<T>&, LossForm);                              \
  template Tensor<T> argmax_one_hot(const Tensor<T>&);                                                         \
  template Tensor<T> kl_divergence(const Tensor<T>&, const Tensor<T>&, double);                                \
  template DistillationLoss<T> distillation_loss(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,         \
                                                 const Tensor<T>&, DistillMode, double, LossForm);

MULTINET_INSTANTIATE_LOSSES(float)
MULTINET_INSTANTIATE_LOSSES(double)

}  // namespace multinet
