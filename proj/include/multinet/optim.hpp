// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "multinet/module.hpp"

namespace multinet {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// First/second moments in parameter order, plus the step counter t.
template <typename T>
struct OptimizerState {
  std::vector<std::string> names;
  std::vector<std::vector<T>> m, v;
  std::vector<Shape> shapes;
  std::uint64_t step = 0;
};

/// Adam with bias correction. Parameters without a gradient are treated as
/// having a zero gradient.
template <typename T>
class Adam {
 public:
  Adam(ParameterList<T> params, AdamConfig cfg);

  void step();
  void zero_grad();

  const ParameterList<T>& parameters() const { return params_; }
  const AdamConfig& config() const { return cfg_; }
  OptimizerState<T>& state() { return state_; }
  const OptimizerState<T>& state() const { return state_; }
  /// Throws ShapeError naming the first moment whose shape differs from its parameter.
  void set_state(OptimizerState<T> state);

 private:
  ParameterList<T> params_;
  AdamConfig cfg_;
  OptimizerState<T> state_;
};

}  // namespace multinet
