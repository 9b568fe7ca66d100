// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace multinet {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <typename T>
class Tensor;

namespace detail {

/// Storage and autograd record shared by all handles of one tensor.
///
/// `backward` reads this node's `grad` and accumulates into the nodes held in
/// `inputs`. Leaves have no `backward`. `id` is taken from a global counter at
/// creation, so sorting reachable nodes by descending id yields a valid reverse
/// topological order.
template <typename T>
struct TensorImpl {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;
  bool requires_grad = false;
  std::uint64_t id = 0;
  const char* op = "leaf";
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  std::function<void(TensorImpl&)> backward;

  bool is_leaf() const { return !backward; }
  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
  }
};

std::uint64_t next_node_id();

}  // namespace detail

/// Whether newly created op results record a backward node on this thread.
bool grad_enabled();

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Dense row-major tensor handle. Copies share storage and gradient; use
/// `clone()` or `detach()` for an independent copy.
template <typename T>
class Tensor {
 public:
  using value_type = T;
  using Impl = detail::TensorImpl<T>;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> values);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), T(0)); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), T(1)); }
  static Tensor full(Shape shape, T value) { return Tensor(std::move(shape), value); }
  static Tensor scalar(T value) { return Tensor(Shape{}, value); }
  static Tensor uniform(Shape shape, T lo, T hi, std::mt19937_64& rng);
  static Tensor normal(Shape shape, T mean, T stddev, std::mt19937_64& rng);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t dim() const { return impl_->shape.size(); }
  std::size_t extent(std::size_t axis) const { return impl_->shape.at(axis); }
  std::size_t numel() const { return impl_->data.size(); }

  std::span<T> data() { return impl_->data; }
  std::span<const T> data() const { return impl_->data; }
  std::vector<T>& values() { return impl_->data; }
  const std::vector<T>& values() const { return impl_->data; }

  bool has_grad() const { return impl_->grad.size() == impl_->data.size() && numel() > 0; }
  std::span<T> grad() { return impl_->grad; }
  std::span<const T> grad() const { return impl_->grad; }
  /// Gradient as a detached tensor; zeros when none has been accumulated.
  Tensor grad_tensor() const;

  T item() const;
  T at(std::initializer_list<std::size_t> index) const;
  T& at(std::initializer_list<std::size_t> index);

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool flag);
  void zero_grad();

  /// Independent copy of the values without graph history.
  Tensor detach() const;
  Tensor clone() const { return detach(); }

  const char* op_name() const { return impl_->op; }
  void backward() const;

  const std::shared_ptr<Impl>& impl() const { return impl_; }
  static Tensor from_impl(std::shared_ptr<Impl> impl);

 private:
  std::size_t flat_index(std::initializer_list<std::size_t> index) const;

  std::shared_ptr<Impl> impl_;
};

/// Reverse-mode sweep from a scalar loss. Leaf gradients accumulate across
/// calls until zeroed; intermediate gradients are reset on every call.
template <typename T>
void backward(const Tensor<T>& loss);

/// Builds the result of a differentiable op. `backward_fn` is attached only when
/// gradient recording is enabled and at least one input requires a gradient.
template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> values, const char* op,
                      std::vector<Tensor<T>> inputs,
                      std::function<void(detail::TensorImpl<T>&)> backward_fn);

/// Adds `delta` into the gradient buffer of `impl` when it requires a gradient.
template <typename T>
void accumulate_grad(detail::TensorImpl<T>& impl, std::span<const T> delta);

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace multinet
