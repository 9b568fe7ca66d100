// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "multinet/classes.hpp"
#include "multinet/metrics.hpp"
#include "test_util.hpp"

using namespace multinet;

namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

struct Oracle {
  double p, r, f1;
};

// Straight from the definitions; zero denominators give 0.
Oracle oracle(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred, std::size_t cls) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (pred[i] == cls && truth[i] == cls) ++tp;
    if (pred[i] == cls && truth[i] != cls) ++fp;
    if (pred[i] != cls && truth[i] == cls) ++fn;
  }
  const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  return {p, r, p + r > 0 ? 2 * p * r / (p + r) : 0.0};
}

std::vector<std::size_t> random_labels(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, k - 1);
  std::vector<std::size_t> out(n);
  for (auto& v : out) v = d(rng);
  return out;
}

std::vector<std::string> names() {
  return {kClassNames.begin(), kClassNames.end()};
}

}  // namespace

TEST(Confusion, HandCounted) {
  auto cm = confusion({0, 0, 1, 2, 2, 2}, {0, 1, 1, 2, 0, 2}, 3);
  EXPECT_EQ(cm.counts, (std::vector<std::uint64_t>{1, 1, 0, 0, 1, 0, 1, 0, 2}));
  EXPECT_EQ(cm.total(), 6u);
  EXPECT_EQ(cm.row_sum(2), 3u);
  EXPECT_EQ(cm.col_sum(0), 2u);
}

TEST(Confusion, BruteForce) {
  std::mt19937_64 rng(1);
  auto t = random_labels(500, 8, rng), p = random_labels(500, 8, rng);
  auto cm = confusion(t, p, 8);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      std::uint64_t n = 0;
      for (std::size_t s = 0; s < 500; ++s) n += t[s] == i && p[s] == j;
      EXPECT_EQ(cm.at(i, j), n);
    }
}

TEST(Confusion, RejectsBadInput) {
  EXPECT_THROW(confusion({0, 1}, {0}, 2), std::invalid_argument);
  EXPECT_THROW(confusion({0, 2}, {0, 1}, 2), std::invalid_argument);
}

TEST(Metrics, HandComputed) {
  // Class 0: TP 1, FP 1, FN 1. Class 1: TP 1, FP 1, FN 0. Class 2: TP 2, FP 0, FN 1.
  auto m = compute_metrics(confusion({0, 0, 1, 2, 2, 2}, {0, 1, 1, 2, 0, 2}, 3));
  EXPECT_DOUBLE_EQ(m.per_class[0].precision, 0.5);
  EXPECT_DOUBLE_EQ(m.per_class[0].recall, 0.5);
  EXPECT_DOUBLE_EQ(m.per_class[1].precision, 0.5);
  EXPECT_DOUBLE_EQ(m.per_class[1].recall, 1.0);
  EXPECT_DOUBLE_EQ(m.per_class[1].f1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.per_class[2].precision, 1.0);
  EXPECT_DOUBLE_EQ(m.per_class[2].recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.per_class[2].f1, 0.8);
  EXPECT_DOUBLE_EQ(m.accuracy, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(m.macro_f1, (0.5 + 2.0 / 3.0 + 0.8) / 3.0);
  EXPECT_EQ(m.per_class[2].support, 3u);
}

TEST(Metrics, RandomAgainstDefinitions) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = random_labels(200, 8, rng), p = random_labels(200, 8, rng);
    auto m = compute_metrics(confusion(t, p, 8));
    double mp = 0, mr = 0, mf = 0;
    for (std::size_t c = 0; c < 8; ++c) {
      const auto o = oracle(t, p, c);
      EXPECT_NEAR(m.per_class[c].precision, o.p, 1e-15);
      EXPECT_NEAR(m.per_class[c].recall, o.r, 1e-15);
      EXPECT_NEAR(m.per_class[c].f1, o.f1, 1e-15);
      mp += o.p / 8, mr += o.r / 8, mf += o.f1 / 8;
    }
    EXPECT_NEAR(m.macro_precision, mp, 1e-12);
    EXPECT_NEAR(m.macro_recall, mr, 1e-12);
    EXPECT_NEAR(m.macro_f1, mf, 1e-12);
  }
}

TEST(Metrics, EmptyMatrixRejected) {
  ConfusionMatrix cm{3, default_class_names(3), std::vector<std::uint64_t>(9, 0)};
  EXPECT_THROW(compute_metrics(cm), std::invalid_argument);
}

TEST(Metrics, ZeroSupportFlagged) {
  auto m = compute_metrics(confusion({0, 0, 1}, {0, 0, 1}, 3));
  EXPECT_EQ(m.per_class[2].support, 0u);
  EXPECT_TRUE(m.per_class[2].recall_undefined);
  EXPECT_TRUE(m.per_class[2].precision_undefined);
  EXPECT_EQ(m.per_class[2].recall, 0.0);
  EXPECT_TRUE(m.any_undefined());
  auto text = render_report(m, ReportFormat::kText);
  EXPECT_NE(text.find('*'), std::string::npos);
}

TEST(Metrics, MicroAveragesEqualAccuracy) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = random_labels(64, 8, rng), p = random_labels(64, 8, rng);
    auto m = compute_metrics(confusion(t, p, 8));
    EXPECT_NEAR(m.micro_precision(), m.accuracy, 1e-15);
    EXPECT_NEAR(m.micro_recall(), m.accuracy, 1e-15);
  }
}

TEST(Metrics, MacroInvariantUnderClassRelabeling) {
  std::mt19937_64 rng(4);
  auto t = random_labels(300, 8, rng), p = random_labels(300, 8, rng);
  std::vector<std::size_t> perm{3, 7, 0, 5, 1, 6, 2, 4};
  auto t2 = t, p2 = p;
  for (auto& v : t2) v = perm[v];
  for (auto& v : p2) v = perm[v];
  auto a = compute_metrics(confusion(t, p, 8)), b = compute_metrics(confusion(t2, p2, 8));
  EXPECT_NEAR(a.macro_f1, b.macro_f1, 1e-12);
  EXPECT_NEAR(a.macro_precision, b.macro_precision, 1e-12);
  EXPECT_DOUBLE_EQ(a.accuracy, b.accuracy);
  for (std::size_t c = 0; c < 8; ++c) EXPECT_DOUBLE_EQ(a.per_class[c].f1, b.per_class[perm[c]].f1);
}

TEST(Report, CsvRowsAndFooter) {
  std::mt19937_64 rng(5);
  auto t = random_labels(100, 8, rng), p = random_labels(100, 8, rng);
  auto csv = lines(render_report(compute_metrics(confusion(t, p, 8, names())), ReportFormat::kCsv));
  ASSERT_EQ(csv.size(), 10u);
  EXPECT_EQ(csv[0], "class,precision,recall,f1,support");
  for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(csv[c + 1].substr(0, csv[c + 1].find(',')), kClassNames[c]);
  EXPECT_EQ(csv[9].rfind("macro,", 0), 0u);
}

TEST(Report, JsonRoundTrip) {
  std::mt19937_64 rng(6);
  auto t = random_labels(150, 8, rng), p = random_labels(150, 8, rng);
  auto m = compute_metrics(confusion(t, p, 8, names()));
  auto back = parse_json_report(render_report(m, ReportFormat::kJson));
  ASSERT_EQ(back.per_class.size(), 8u);
  for (std::size_t c = 0; c < 8; ++c) {
    EXPECT_EQ(back.per_class[c].name, m.per_class[c].name);
    EXPECT_DOUBLE_EQ(back.per_class[c].precision, m.per_class[c].precision);
    EXPECT_DOUBLE_EQ(back.per_class[c].f1, m.per_class[c].f1);
    EXPECT_EQ(back.per_class[c].support, m.per_class[c].support);
  }
  EXPECT_DOUBLE_EQ(back.macro_f1, m.macro_f1);
  EXPECT_DOUBLE_EQ(back.accuracy, m.accuracy);
  EXPECT_EQ(back.matrix.counts, m.matrix.counts);
}

TEST(Report, TextRowsFollowClassTable) {
  // Every adenosis image correct, everything else spread.
  std::vector<std::size_t> t, p;
  for (int i = 0; i < 10; ++i) t.push_back(0), p.push_back(0);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> d(1, 7);
  for (int i = 0; i < 200; ++i) t.push_back(d(rng)), p.push_back(d(rng));
  auto text = lines(render_report(compute_metrics(confusion(t, p, 8, names())), ReportFormat::kText, "test"));
  std::vector<std::vector<std::string>> rows;
  for (const auto& l : text) rows.push_back(tokens(l));
  auto header = std::find_if(rows.begin(), rows.end(), [](const auto& r) { return !r.empty() && r[0] == "Class"; });
  ASSERT_NE(header, rows.end());
  EXPECT_EQ(*header, (std::vector<std::string>{"Class", "Precision", "Recall", "F1-Score", "Support"}));
  for (std::size_t c = 0; c < 8; ++c) {
    const auto& row = *(header + 1 + static_cast<long>(c));
    ASSERT_GE(row.size(), 4u);
    EXPECT_EQ(row[0], kClassNames[c]);
  }
  const auto& a = *(header + 1);
  EXPECT_EQ((std::vector<std::string>{a[1], a[2], a[3]}), (std::vector<std::string>{"1.00", "1.00", "1.00"}));
  const auto& footer = *(header + 9);
  ASSERT_GE(footer.size(), 2u);
  EXPECT_EQ(footer[0] + " " + footer[1], "macro avg");
  bool labelled = false;
  for (const auto& l : text) labelled |= l.find("macro") != std::string::npos && l.find("unweighted") != std::string::npos;
  EXPECT_TRUE(labelled);
}

TEST(Report, FormatNames) {
  EXPECT_EQ(parse_report_format("csv"), ReportFormat::kCsv);
  EXPECT_EQ(extension(ReportFormat::kJson), "json");
  EXPECT_THROW(parse_report_format("xml"), std::invalid_argument);
}
