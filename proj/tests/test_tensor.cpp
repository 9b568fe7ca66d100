// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "multinet/errors.hpp"
#include "multinet/layers.hpp"
#include "multinet/losses.hpp"
#include "multinet/ops.hpp"
#include "test_util.hpp"

using namespace multinet;
using testutil::fd_max_rel_error;
using testutil::values_of;
using TD = Tensor<double>;

TEST(Elementwise, AddVectors) {
  auto r = add(TD({2}, {1, 2}), TD({2}, {3, 4}));
  EXPECT_EQ(values_of(r), (std::vector<double>{4, 6}));
}

TEST(Elementwise, MulByZeroGivesZeros) {
  std::mt19937_64 rng(1);
  auto x = TD::uniform({3, 4}, -1, 1, rng);
  auto r = mul(x, 0.0);
  EXPECT_EQ(r.shape(), x.shape());
  for (double v : r.data()) EXPECT_EQ(v, 0.0);
}

TEST(Elementwise, MismatchNamesBothShapes) {
  try {
    add(TD({2, 3}), TD({4}));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(2,3)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(4,)"), std::string::npos) << msg;
  }
}

TEST(Elementwise, TrailingBroadcast) {
  auto r = add(TD({2, 3}, {0, 0, 0, 1, 1, 1}), TD({3}, {1, 2, 3}));
  EXPECT_EQ(values_of(r), (std::vector<double>{1, 2, 3, 2, 3, 4}));
}

TEST(Matmul, IdentityLeavesInput) {
  std::mt19937_64 rng(2);
  TD eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  auto x = TD::uniform({3, 5}, -1, 1, rng);
  EXPECT_EQ(values_of(matmul(eye, x)), values_of(x));
}

TEST(Matmul, RowTimesColumnIsDot) {
  TD a({1, 4}, {1, 2, 3, 4}), b({4, 1}, {5, 6, 7, 8});
  EXPECT_DOUBLE_EQ(matmul(a, b).item(), 1 * 5 + 2 * 6 + 3 * 7 + 4 * 8);
}

TEST(Matmul, InnerMismatchThrows) { EXPECT_THROW(matmul(TD({2, 3}), TD({4, 2})), ShapeError); }

TEST(Matmul, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  auto a = TD::uniform({3, 4}, -1, 1, rng), b = TD::uniform({4, 2}, -1, 1, rng);
  auto w = TD::uniform({3, 2}, -1, 1, rng);
  EXPECT_LE(fd_max_rel_error([&] { return sum(mul(matmul(a, b), w)); }, {a, b}), 1e-4);
}

TEST(Backward, SumGivesOnes) {
  TD x({2, 3}, 0.5);
  x.set_requires_grad(true);
  sum(x).backward();
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, SquareGivesTwiceX) {
  TD x({4}, {-1.5, 0, 2, 3});
  x.set_requires_grad(true);
  sum(mul(x, x)).backward();
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(x.grad()[i], 2 * x.data()[i]);
}

TEST(Backward, AccumulatesUntilZeroed) {
  std::mt19937_64 rng(4);
  auto x = TD::uniform({5}, -1, 1, rng);
  x.set_requires_grad(true);
  auto loss = sum(mul(exp(x), x));
  loss.backward();
  const std::vector<double> once(x.grad().begin(), x.grad().end());
  loss.backward();
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(x.grad()[i], 2 * once[i]);
  x.zero_grad();
  loss.backward();
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(x.grad()[i], once[i]);
}

TEST(Backward, NonScalarLossRejected) {
  TD x({3}, 1.0);
  x.set_requires_grad(true);
  EXPECT_THROW(mul(x, 2.0).backward(), ShapeError);
}

TEST(Backward, CompositeConvReluLinearCrossEntropy) {
  std::mt19937_64 rng(5);
  auto x = TD::uniform({2, 2, 5, 5}, -1, 1, rng);
  auto conv = Conv2d<double>::init(2, 3, 3, 1, Padding::kSame, rng);
  conv.bias = TD::uniform({3}, -1, 1, rng);
  auto fc = Linear<double>::init(75, 8, rng);
  auto y = one_hot<double>({3, 6}, 8);
  auto loss = [&] {
    auto h = relu(conv.forward(x));
    return cross_entropy(fc.forward(reshape(h, {2, 75})), y);
  };
  EXPECT_LE(fd_max_rel_error(loss, {x, conv.weight, conv.bias, fc.weight, fc.bias}), 1e-4);
}

TEST(NoGrad, ForwardIsBitIdentical) {
  std::mt19937_64 rng(6);
  auto a = TD::uniform({4, 6}, -1, 1, rng), b = TD::uniform({6, 3}, -1, 1, rng);
  a.set_requires_grad(true);
  auto f = [&] { return softmax(add(matmul(gelu(a), b), 0.25)); };
  auto tracked = f();
  EXPECT_TRUE(tracked.requires_grad());
  std::vector<double> plain;
  {
    NoGradGuard guard;
    auto r = f();
    EXPECT_FALSE(r.requires_grad());
    plain = values_of(r);
  }
  EXPECT_EQ(values_of(tracked), plain);
}

TEST(Shapes, ConcatAxisOne) {
  auto c = concat<double>({TD({2, 3}, 1.0), TD({2, 5}, 2.0)}, 1);
  EXPECT_EQ(c.shape(), (Shape{2, 8}));
  EXPECT_EQ(c.at({1, 2}), 1.0);
  EXPECT_EQ(c.at({1, 3}), 2.0);
}

TEST(Shapes, ReshapeKeepsRowMajorOrder) {
  TD a({2, 3}, {1, 2, 3, 4, 5, 6});
  auto r = reshape(a, {6});
  EXPECT_EQ(r.shape(), (Shape{6}));
  EXPECT_EQ(values_of(r), values_of(a));
  EXPECT_THROW(reshape(a, {4}), ShapeError);
}

TEST(Shapes, ConcatMismatchThrows) { EXPECT_THROW(concat<double>({TD({2, 3}), TD({3, 3})}, 1), ShapeError); }

TEST(Shapes, ConcatBackwardSplitsGradient) {
  std::mt19937_64 rng(7);
  auto a = TD::uniform({2, 3}, -1, 1, rng), b = TD::uniform({2, 5}, -1, 1, rng);
  auto w = TD::uniform({2, 8}, -1, 1, rng);
  a.set_requires_grad(true);
  b.set_requires_grad(true);
  sum(mul(concat<double>({a, b}, 1), w)).backward();
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(a.grad()[i * 3 + j], w.at({i, j}));
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(b.grad()[i * 5 + j], w.at({i, 3 + j}));
  }
  EXPECT_LE(fd_max_rel_error([&] { return sum(mul(concat<double>({a, b}, 1), w)); }, {a, b}), 1e-4);
}

TEST(Shapes, TransposeAndSlice) {
  TD a({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(values_of(transpose(a, 0, 1)), (std::vector<double>{1, 4, 2, 5, 3, 6}));
  EXPECT_EQ(values_of(slice(a, 1, 1, 2)), (std::vector<double>{2, 3, 5, 6}));
  EXPECT_THROW(slice(a, 1, 2, 2), ShapeError);
}

TEST(Gradients, EveryBasicOpAtDoublePrecision) {
  std::mt19937_64 rng(8);
  auto a = TD::uniform({3, 4}, -1, 1, rng), b = TD::uniform({4}, -1, 1, rng);
  auto c = TD::uniform({3, 4}, 1.5, 2.5, rng), w = TD::uniform({3, 4}, -1, 1, rng);
  auto f = [&] {
    auto h = div(mul(add(a, b), sub(a, b)), c);
    return add(sum(mul(h, w)), sum(mul(exp(a), log(c))));
  };
  EXPECT_LE(fd_max_rel_error(f, {a, b, c}), 1e-4);
}

TEST(Precision, FloatAndDoubleAgree) {
  std::mt19937_64 rng(9);
  auto a = TD::uniform({4, 4}, -1, 1, rng);
  Tensor<float> af({4, 4}, std::vector<float>(a.data().begin(), a.data().end()));
  auto rd = softmax(matmul(a, a));
  auto rf = softmax(matmul(af, af));
  for (std::size_t i = 0; i < rd.numel(); ++i) EXPECT_NEAR(rd.data()[i], rf.data()[i], 1e-6);
}
