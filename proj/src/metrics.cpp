// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include "multinet/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

#include "multinet/classes.hpp"

namespace multinet {

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::row_sum(std::size_t i) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < k; ++j) s += at(i, j);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t j) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < k; ++i) s += at(i, j);
  return s;
}

std::vector<std::string> default_class_names(std::size_t k) {
  std::vector<std::string> names;
  if (k == kClassNames.size()) {
    for (auto n : kClassNames) names.emplace_back(n);
  } else {
    for (std::size_t i = 0; i < k; ++i) names.push_back(std::to_string(i));
  }
  return names;
}

ConfusionMatrix confusion(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted,
                          std::size_t k, std::vector<std::string> class_names) {
  if (truth.size() != predicted.size()) {
    throw std::invalid_argument("confusion: " + std::to_string(truth.size()) + " true labels but " +
                                std::to_string(predicted.size()) + " predictions");
  }
  if (k == 0) throw std::invalid_argument("confusion: K must be positive");
  if (class_names.empty()) class_names = default_class_names(k);
  if (class_names.size() != k) throw std::invalid_argument("confusion: class name count differs from K");
  ConfusionMatrix cm{k, std::move(class_names), std::vector<std::uint64_t>(k * k, 0)};
  for (std::size_t n = 0; n < truth.size(); ++n) {
    if (truth[n] >= k || predicted[n] >= k) {
      throw std::invalid_argument("confusion: label out of range at index " + std::to_string(n) + " (K=" +
                                  std::to_string(k) + ")");
    }
    ++cm.counts[truth[n] * k + predicted[n]];
  }
  return cm;
}

double ClassMetrics::micro_precision() const {
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t c = 0; c < matrix.k; ++c) {
    tp += matrix.at(c, c);
    fp += matrix.col_sum(c) - matrix.at(c, c);
  }
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double ClassMetrics::micro_recall() const {
  std::uint64_t tp = 0, fn = 0;
  for (std::size_t c = 0; c < matrix.k; ++c) {
    tp += matrix.at(c, c);
    fn += matrix.row_sum(c) - matrix.at(c, c);
  }
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

bool ClassMetrics::any_undefined() const {
  return std::any_of(per_class.begin(), per_class.end(), [](const ClassMetric& c) {
    return c.precision_undefined || c.recall_undefined || c.f1_undefined;
  });
}

ClassMetrics compute_metrics(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw std::invalid_argument("metrics: confusion matrix is all zero");
  ClassMetrics m;
  m.matrix = cm;
  m.total = total;
  std::uint64_t trace = 0;
  for (std::size_t c = 0; c < cm.k; ++c) {
    ClassMetric row;
    row.name = cm.class_names[c];
    const std::uint64_t tp = cm.at(c, c), predicted = cm.col_sum(c), actual = cm.row_sum(c);
    trace += tp;
    row.support = actual;
    if (predicted == 0) {
      row.precision_undefined = true;
    } else {
      row.precision = static_cast<double>(tp) / static_cast<double>(predicted);
    }
    if (actual == 0) {
      row.recall_undefined = true;
    } else {
      row.recall = static_cast<double>(tp) / static_cast<double>(actual);
    }
    if (row.precision + row.recall > 0.0) {
      row.f1 = 2.0 * row.precision * row.recall / (row.precision + row.recall);
    } else {
      row.f1_undefined = true;
    }
    m.macro_precision += row.precision;
    m.macro_recall += row.recall;
    m.macro_f1 += row.f1;
    m.per_class.push_back(row);
  }
  const double k = static_cast<double>(cm.k);
  m.macro_precision /= k;
  m.macro_recall /= k;
  m.macro_f1 /= k;
  m.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  return m;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "text" || name == "txt") return ReportFormat::kText;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw std::invalid_argument("unknown report format '" + name + "' (known: text, csv, json)");
}

std::string extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::kText: return "txt";
    case ReportFormat::kCsv: return "csv";
    case ReportFormat::kJson: return "json";
  }
  return "txt";
}

namespace {

std::string render_text(const ClassMetrics& m, const std::string& title) {
  std::string out;
  if (!title.empty()) out += title + "\n";
  std::size_t width = 5;
  for (const auto& c : m.per_class) width = std::max(width, c.name.size());
  width = std::max<std::size_t>(width, 9);
  out += fmt::format("{:<{}}  {:>9}  {:>6}  {:>8}  {:>7}\n", "Class", width, "Precision", "Recall", "F1-Score",
                     "Support");
  for (const auto& c : m.per_class) {
    const bool flagged = c.precision_undefined || c.recall_undefined || c.f1_undefined;
    out += fmt::format("{:<{}}  {:>9.2f}  {:>6.2f}  {:>8.2f}  {:>7}{}\n", c.name, width, c.precision, c.recall, c.f1,
                       c.support, flagged ? " *" : "");
  }
  out += fmt::format("{:<{}}  {:>9.2f}  {:>6.2f}  {:>8.2f}  {:>7}\n", "macro avg", width, m.macro_precision,
                     m.macro_recall, m.macro_f1, m.total);
  out += fmt::format("accuracy {:.2f} over {} samples\n", m.accuracy, m.total);
  out += "averages are macro (unweighted mean over classes)\n";
  if (m.any_undefined()) out += "* zero denominator, value reported as 0\n";
  out += "\nconfusion matrix (rows = true, columns = predicted)\n";
  out += fmt::format("{:<{}}", "", width);
  for (const auto& n : m.matrix.class_names) out += fmt::format(" {:>6}", n);
  out += "\n";
  for (std::size_t i = 0; i < m.matrix.k; ++i) {
    out += fmt::format("{:<{}}", m.matrix.class_names[i], width);
    for (std::size_t j = 0; j < m.matrix.k; ++j) out += fmt::format(" {:>6}", m.matrix.at(i, j));
    out += "\n";
  }
  return out;
}

std::string render_csv(const ClassMetrics& m) {
  std::string out = "class,precision,recall,f1,support\n";
  for (const auto& c : m.per_class) {
    out += fmt::format("{},{:.2f},{:.2f},{:.2f},{}\n", c.name, c.precision, c.recall, c.f1, c.support);
  }
  out += fmt::format("macro,{:.2f},{:.2f},{:.2f},{}\n", m.macro_precision, m.macro_recall, m.macro_f1, m.total);
  return out;
}

std::string render_json(const ClassMetrics& m, const std::string& title) {
  nlohmann::ordered_json doc;
  if (!title.empty()) doc["title"] = title;
  nlohmann::ordered_json classes = nlohmann::ordered_json::object();
  for (const auto& c : m.per_class) {
    classes[c.name] = {{"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1},
                       {"support", c.support},
                       {"precision_undefined", c.precision_undefined},
                       {"recall_undefined", c.recall_undefined},
                       {"f1_undefined", c.f1_undefined}};
  }
  doc["classes"] = classes;
  doc["macro"] = {{"precision", m.macro_precision},
                  {"recall", m.macro_recall},
                  {"f1", m.macro_f1},
                  {"average", "macro"}};
  doc["accuracy"] = m.accuracy;
  doc["total"] = m.total;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.matrix.k; ++i) {
    rows.push_back(std::vector<std::uint64_t>(m.matrix.counts.begin() + i * m.matrix.k,
                                              m.matrix.counts.begin() + (i + 1) * m.matrix.k));
  }
  doc["confusion_matrix"] = {{"labels", m.matrix.class_names}, {"rows", rows}};
  return doc.dump(2) + "\n";
}

}  // namespace

std::string render_report(const ClassMetrics& m, ReportFormat format, const std::string& title) {
  switch (format) {
    case ReportFormat::kText: return render_text(m, title);
    case ReportFormat::kCsv: return render_csv(m);
    case ReportFormat::kJson: return render_json(m, title);
  }
  throw std::invalid_argument("unknown report format");
}

ClassMetrics parse_json_report(const std::string& document) {
  const auto doc = nlohmann::ordered_json::parse(document);
  ClassMetrics m;
  for (const auto& [name, c] : doc.at("classes").items()) {
    ClassMetric row;
    row.name = name;
    row.precision = c.at("precision").get<double>();
    row.recall = c.at("recall").get<double>();
    row.f1 = c.at("f1").get<double>();
    row.support = c.at("support").get<std::uint64_t>();
    row.precision_undefined = c.at("precision_undefined").get<bool>();
    row.recall_undefined = c.at("recall_undefined").get<bool>();
    row.f1_undefined = c.at("f1_undefined").get<bool>();
    m.per_class.push_back(row);
  }
  m.macro_precision = doc.at("macro").at("precision").get<double>();
  m.macro_recall = doc.at("macro").at("recall").get<double>();
  m.macro_f1 = doc.at("macro").at("f1").get<double>();
  m.accuracy = doc.at("accuracy").get<double>();
  m.total = doc.at("total").get<std::uint64_t>();
  const auto& cm = doc.at("confusion_matrix");
  m.matrix.class_names = cm.at("labels").get<std::vector<std::string>>();
  m.matrix.k = m.matrix.class_names.size();
  for (const auto& row : cm.at("rows")) {
    for (const auto& v : row) m.matrix.counts.push_back(v.get<std::uint64_t>());
  }
  return m;
}

}  // namespace multinet
