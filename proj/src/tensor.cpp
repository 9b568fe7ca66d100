// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include "multinet/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <unordered_set>

#include "multinet/errors.hpp"

namespace multinet {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  if (shape.size() == 1) os << ',';
  os << ')';
  return os.str();
}

namespace detail {
std::uint64_t next_node_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}
}  // namespace detail

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : impl_(std::make_shared<Impl>()) {
  impl_->data.assign(shape_numel(shape), fill);
  impl_->shape = std::move(shape);
  impl_->id = detail::next_node_id();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : impl_(std::make_shared<Impl>()) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor of shape " + shape_str(shape) + " needs " +
                     std::to_string(shape_numel(shape)) + " values, got " +
                     std::to_string(values.size()));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
  impl_->id = detail::next_node_id();
}

template <typename T>
Tensor<T> Tensor<T>::uniform(Shape shape, T lo, T hi, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<T> dist(lo, hi);
  for (T& v : t.impl_->data) v = dist(rng);
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::normal(Shape shape, T mean, T stddev, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<T> dist(mean, stddev);
  for (T& v : t.impl_->data) v = dist(rng);
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::from_impl(std::shared_ptr<Impl> impl) {
  Tensor t;
  t.impl_ = std::move(impl);
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::grad_tensor() const {
  if (!has_grad()) return Tensor(impl_->shape);
  return Tensor(impl_->shape, impl_->grad);
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) {
    throw ShapeError("item() needs a single-element tensor, got " + shape_str(shape()));
  }
  return impl_->data[0];
}

template <typename T>
std::size_t Tensor<T>::flat_index(std::initializer_list<std::size_t> index) const {
  if (index.size() != impl_->shape.size()) {
    throw ShapeError("index rank " + std::to_string(index.size()) + " for tensor " +
                     shape_str(impl_->shape));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= impl_->shape[axis]) {
      throw ShapeError("index out of range for tensor " + shape_str(impl_->shape));
    }
    flat = flat * impl_->shape[axis] + i;
    ++axis;
  }
  return flat;
}

template <typename T>
T Tensor<T>::at(std::initializer_list<std::size_t> index) const {
  return impl_->data[flat_index(index)];
}

template <typename T>
T& Tensor<T>::at(std::initializer_list<std::size_t> index) {
  return impl_->data[flat_index(index)];
}

template <typename T>
Tensor<T>& Tensor<T>::set_requires_grad(bool flag) {
  impl_->requires_grad = flag;
  return *this;
}

template <typename T>
void Tensor<T>::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(impl_->shape, impl_->data);
}

template <typename T>
void Tensor<T>::backward() const {
  multinet::backward(*this);
}

template <typename T>
void backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got " +
                     (loss.defined() ? shape_str(loss.shape()) : std::string("undefined")));
  }
  using Impl = detail::TensorImpl<T>;
  const auto& root = loss.impl();
  if (!root->requires_grad) {
    throw std::logic_error("backward() on a loss that is not attached to a graph");
  }

  std::vector<Impl*> order;
  std::unordered_set<const Impl*> seen;
  std::vector<Impl*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    Impl* node = stack.back();
    stack.pop_back();
    order.push_back(node);
    for (const auto& in : node->inputs) {
      if (in->requires_grad && seen.insert(in.get()).second) stack.push_back(in.get());
    }
  }
  std::sort(order.begin(), order.end(), [](const Impl* a, const Impl* b) { return a->id > b->id; });

  for (Impl* node : order) {
    if (node->is_leaf()) {
      node->ensure_grad();
    } else {
      node->grad.assign(node->data.size(), T(0));
    }
  }
  if (root->is_leaf()) {
    root->grad[0] += T(1);
    return;
  }
  root->grad[0] = T(1);
  for (Impl* node : order) {
    if (!node->is_leaf()) node->backward(*node);
  }
}

template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> values, const char* op,
                      std::vector<Tensor<T>> inputs,
                      std::function<void(detail::TensorImpl<T>&)> backward_fn) {
  Tensor<T> out(std::move(shape), std::move(values));
  auto& impl = *out.impl();
  impl.op = op;
  if (!grad_enabled()) return out;
  bool needs = false;
  for (const auto& in : inputs) needs = needs || (in.defined() && in.requires_grad());
  if (!needs) return out;
  impl.requires_grad = true;
  for (auto& in : inputs) {
    if (in.defined()) impl.inputs.push_back(in.impl());
  }
  impl.backward = std::move(backward_fn);
  return out;
}

template <typename T>
void accumulate_grad(detail::TensorImpl<T>& impl, std::span<const T> delta) {
  if (!impl.requires_grad) return;
  impl.ensure_grad();
  for (std::size_t i = 0; i < delta.size(); ++i) impl.grad[i] += delta[i];
}

template class Tensor<float>;
template class Tensor<double>;
template void backward(const Tensor<float>&);
template void backward(const Tensor<double>&);
template Tensor<float> make_result(Shape, std::vector<float>, const char*, std::vector<Tensor<float>>,
                                   std::function<void(detail::TensorImpl<float>&)>);
template Tensor<double> make_result(Shape, std::vector<double>, const char*,
                                    std::vector<Tensor<double>>,
                                    std::function<void(detail::TensorImpl<double>&)>);
template void accumulate_grad(detail::TensorImpl<float>&, std::span<const float>);
template void accumulate_grad(detail::TensorImpl<double>&, std::span<const double>);

}  // namespace multinet
