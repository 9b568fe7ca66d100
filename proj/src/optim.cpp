// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include "multinet/optim.hpp"

#include <cmath>

#include "multinet/errors.hpp"

namespace multinet {

void AdamConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be a finite non-negative number");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

template <typename T>
Adam<T>::Adam(ParameterList<T> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  cfg_.validate();
  for (const auto& p : params_) {
    state_.names.push_back(p.name);
    state_.shapes.push_back(p.tensor.shape());
    state_.m.emplace_back(p.tensor.numel(), T(0));
    state_.v.emplace_back(p.tensor.numel(), T(0));
  }
}

template <typename T>
void Adam<T>::step() {
  ++state_.step;
  const double t = static_cast<double>(state_.step);
  const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(cfg_.beta1, t));
  const T c2 = static_cast<T>(1.0 - std::pow(cfg_.beta2, t));
  const T lr = static_cast<T>(cfg_.learning_rate), eps = static_cast<T>(cfg_.epsilon);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i].tensor;
    auto theta = p.data();
    auto& m = state_.m[i];
    auto& v = state_.v[i];
    const bool has_grad = p.has_grad();
    const T* g = has_grad ? p.grad().data() : nullptr;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const T gj = has_grad ? g[j] : T(0);
      m[j] = b1 * m[j] + (T(1) - b1) * gj;
      v[j] = b2 * v[j] + (T(1) - b2) * gj * gj;
      const T m_hat = m[j] / c1;
      const T v_hat = v[j] / c2;
      theta[j] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

template <typename T>
void Adam<T>::set_state(OptimizerState<T> state) {
  if (state.m.size() != params_.size() || state.v.size() != params_.size()) {
    throw ShapeError("optimizer state holds " + std::to_string(state.m.size()) + " moments for " +
                     std::to_string(params_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto n = params_[i].tensor.numel();
    if (state.m[i].size() != n || state.v[i].size() != n) {
      throw ShapeError("optimizer moment for '" + params_[i].name + "' does not match parameter shape " +
                       shape_str(params_[i].tensor.shape()));
    }
  }
  state.names.clear();
  state.shapes.clear();
  for (const auto& p : params_) {
    state.names.push_back(p.name);
    state.shapes.push_back(p.tensor.shape());
  }
  state_ = std::move(state);
}

template class Adam<float>;
template class Adam<double>;

}  // namespace multinet
