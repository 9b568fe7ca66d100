// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include "multinet/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace multinet {

GradcheckResult check_gradients(const std::function<Tensor<double>()>& loss_fn,
                                const std::vector<Tensor<double>>& wrt,
                                const GradcheckOptions& options) {
  for (auto t : wrt) {
    t.set_requires_grad(true);
    t.impl()->grad.assign(t.numel(), 0.0);
  }
  Tensor<double> loss = loss_fn();
  backward(loss);

  std::mt19937_64 rng(options.seed);
  GradcheckResult result;
  for (std::size_t ti = 0; ti < wrt.size(); ++ti) {
    Tensor<double> t = wrt[ti];
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    std::vector<std::size_t> index(t.numel());
    std::iota(index.begin(), index.end(), std::size_t{0});
    if (options.max_entries_per_tensor > 0 && index.size() > options.max_entries_per_tensor) {
      std::shuffle(index.begin(), index.end(), rng);
      index.resize(options.max_entries_per_tensor);
    }
    for (std::size_t i : index) {
      double& v = t.values()[i];
      const double original = v;
      double plus = 0.0, minus = 0.0;
      {
        NoGradGuard guard;
        v = original + options.epsilon;
        plus = loss_fn().item();
        v = original - options.epsilon;
        minus = loss_fn().item();
      }
      v = original;
      const double numeric = (plus - minus) / (2.0 * options.epsilon);
      const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), options.magnitude_floor});
      const double rel = std::abs(analytic[i] - numeric) / scale;
      if (!(rel <= result.max_relative_error)) {
        result.max_relative_error = std::isnan(rel) ? INFINITY : rel;
        result.worst_tensor = ti;
      }
      ++result.entries_checked;
    }
  }
  return result;
}

std::vector<GradcheckRow> run_gradcheck_suite(const std::vector<GradcheckCase>& cases,
                                              const GradcheckOptions& options) {
  std::vector<GradcheckRow> rows;
  for (const auto& c : cases) {
    GradcheckRow row;
    row.component = c.component;
    const auto start = std::chrono::steady_clock::now();
    try {
      const GradcheckResult r = c.run(options);
      row.max_relative_error = r.max_relative_error;
      row.entries_checked = r.entries_checked;
      row.passed = r.passed(options.tolerance);
    } catch (const std::exception& e) {
      row.error = e.what();
      row.passed = false;
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace multinet
