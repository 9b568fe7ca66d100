// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace multinet {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::size_t k = 0;
  std::vector<std::string> class_names;
  std::vector<std::uint64_t> counts;  // row-major k×k

  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts[truth * k + predicted]; }
  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t i) const;
  std::uint64_t col_sum(std::size_t j) const;
};

/// Canonical names for K=8, otherwise "0".."K-1".
std::vector<std::string> default_class_names(std::size_t k);

ConfusionMatrix confusion(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted,
                          std::size_t k, std::vector<std::string> class_names = {});

struct ClassMetric {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
  // Set when the denominator was zero and the value was reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

struct ClassMetrics {
  std::vector<ClassMetric> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::uint64_t total = 0;
  ConfusionMatrix matrix;

  /// ΣTP / Σ(TP+FP) and ΣTP / Σ(TP+FN) over classes.
  double micro_precision() const;
  double micro_recall() const;
  bool any_undefined() const;
};

/// Throws std::invalid_argument for an all-zero matrix.
ClassMetrics compute_metrics(const ConfusionMatrix& cm);

enum class ReportFormat { kText, kCsv, kJson };

ReportFormat parse_report_format(const std::string& name);
std::string extension(ReportFormat format);

/// Text and CSV print two decimals; JSON carries full precision and the matrix.
std::string render_report(const ClassMetrics& m, ReportFormat format, const std::string& title = "");

/// Inverse of the JSON rendering.
ClassMetrics parse_json_report(const std::string& document);

}  // namespace multinet
