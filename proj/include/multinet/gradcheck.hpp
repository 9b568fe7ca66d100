// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "multinet/tensor.hpp"

namespace multinet {

struct GradcheckOptions {
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  /// Relative errors are taken against max(|analytic|, |numeric|, floor).
  double magnitude_floor = 1e-5;
  /// Entries probed per tensor; 0 probes every entry.
  std::size_t max_entries_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct GradcheckResult {
  double max_relative_error = 0.0;
  std::size_t entries_checked = 0;
  /// Index into `wrt` of the tensor holding the worst entry.
  std::size_t worst_tensor = 0;
  bool passed(double tolerance) const { return max_relative_error <= tolerance; }
};

/// Compares reverse-mode gradients of `loss_fn` with central differences.
///
/// `loss_fn` must rebuild its graph from the current contents of `wrt` on every
/// call. Existing gradients on `wrt` are cleared first.
GradcheckResult check_gradients(const std::function<Tensor<double>()>& loss_fn,
                                const std::vector<Tensor<double>>& wrt,
                                const GradcheckOptions& options = {});

/// One row of the gradient-integrity suite.
struct GradcheckCase {
  std::string component;
  std::function<GradcheckResult(const GradcheckOptions&)> run;
};

struct GradcheckRow {
  std::string component;
  double max_relative_error = 0.0;
  std::size_t entries_checked = 0;
  double seconds = 0.0;
  bool passed = false;
  std::string error;
};

/// Every layer plus the full tiny ViT, DeiT, reduced MultiNet and ViT⊕MultiNet
/// models, all at double precision.
std::vector<GradcheckCase> default_gradcheck_cases();

std::vector<GradcheckRow> run_gradcheck_suite(const std::vector<GradcheckCase>& cases,
                                              const GradcheckOptions& options = {});

}  // namespace multinet
