// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "multinet/errors.hpp"
#include "multinet/losses.hpp"
#include "multinet/models.hpp"
#include "multinet/multinet.hpp"
#include "test_util.hpp"

using namespace multinet;
using testutil::values_of;
using TD = Tensor<double>;

namespace {

void zero(TD& t) { std::fill(t.values().begin(), t.values().end(), 0.0); }

bool any_nonzero_grad(const ParameterList<double>& params, const std::string& prefix) {
  for (const auto& p : params) {
    if (p.name.rfind(prefix, 0) != 0 || !p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad())
      if (g != 0.0) return true;
  }
  return false;
}

}  // namespace

TEST(ResidualBlock, ZeroResidualPassesShortcut) {
  std::mt19937_64 rng(1);
  auto block = ResidualBlock<double>::init(4, 4, 1, rng);
  EXPECT_FALSE(block.projection.weight.defined());
  zero(block.conv2.weight);
  zero(block.conv2.bias);
  auto x = TD::uniform({2, 4, 5, 5}, 0, 1, rng);
  EXPECT_EQ(values_of(block.forward(x)), values_of(x));
}

TEST(ResidualBlock, StrideAddsProjection) {
  std::mt19937_64 rng(2);
  auto block = ResidualBlock<double>::init(4, 8, 2, rng);
  EXPECT_TRUE(block.projection.weight.defined());
  EXPECT_EQ(block.forward(TD({1, 4, 6, 6}, 1.0)).shape(), (Shape{1, 8, 3, 3}));
}

TEST(Backbone, VggStagesHalveExtent) {
  std::mt19937_64 rng(3);
  BackboneConfig cfg{BackboneKind::kVgg, {4, 6, 8}, 1, 3, 2};
  Backbone<double> vgg(cfg, rng);
  EXPECT_EQ(vgg.forward(TD({1, 3, 32, 32}, 0.5)).shape(), (Shape{1, 8, 4, 4}));
  EXPECT_EQ(cfg.output_extent(32), 4u);
  EXPECT_EQ(cfg.output_extent(20), 2u);
}

TEST(Backbone, StridedKindsMatchDeclaredExtent) {
  std::mt19937_64 rng(4);
  for (auto kind : {BackboneKind::kResidual, BackboneKind::kEfficient}) {
    BackboneConfig cfg{kind, {4, 6}, 1, 3, 2};
    Backbone<double> net(cfg, rng);
    for (std::size_t side : {16u, 15u}) {
      auto y = net.forward(TD({1, 3, side, side}, 0.5));
      EXPECT_EQ(y.extent(1), 6u);
      EXPECT_EQ(y.extent(2), cfg.output_extent(side)) << to_string(kind) << " side " << side;
    }
  }
}

TEST(Merge, ConcatenatesChannels) {
  auto m = merge_parallel(TD({2, 3, 4, 4}, 1.0), TD({2, 5, 4, 4}, 2.0));
  EXPECT_EQ(m.shape(), (Shape{2, 8, 4, 4}));
  EXPECT_EQ(m.at({1, 2, 3, 3}), 1.0);
  EXPECT_EQ(m.at({1, 3, 0, 0}), 2.0);
}

TEST(Merge, SlicesRecoverInputs) {
  std::mt19937_64 rng(5);
  auto a = TD::uniform({2, 3, 4, 4}, -1, 1, rng), b = TD::uniform({2, 5, 4, 4}, -1, 1, rng);
  auto m = merge_parallel(a, b);
  EXPECT_EQ(values_of(slice(m, 1, 0, 3)), values_of(a));
  EXPECT_EQ(values_of(slice(m, 1, 3, 5)), values_of(b));
}

TEST(Merge, MismatchNamesBothShapes) {
  try {
    merge_parallel(TD({2, 3, 4, 4}), TD({2, 5, 2, 2}));
    FAIL();
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(2,3,4,4)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(2,5,2,2)"), std::string::npos) << msg;
  }
}

TEST(Head, LogitsShape) {
  std::mt19937_64 rng(6);
  MultiNetHeadConfig cfg{8, 4, 12, 10, 16, 14, 8, 0.0};
  auto head = MultiNetHead<double>::init(cfg, rng);
  auto out = head.forward(TD::uniform({3, 8, 4, 4}, 0, 1, rng), ForwardContext{});
  EXPECT_EQ(out.logits.shape(), (Shape{3, 8}));
  EXPECT_EQ(out.features.shape(), (Shape{3, 14}));
}

TEST(Head, ZeroInputYieldsFinalBias) {
  std::mt19937_64 rng(7);
  MultiNetHeadConfig cfg{8, 4, 12, 10, 16, 14, 8, 0.0};
  auto head = MultiNetHead<double>::init(cfg, rng);
  // Biases start at zero, so every intermediate activation is zero.
  head.out.bias = TD::uniform({8}, -1, 1, rng);
  auto out = head.forward(TD({2, 8, 4, 4}, 0.0), ForwardContext{});
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(out.logits.at({r, c}), head.out.bias.at({c}));
}

TEST(Head, FullWidthCascadeShapes) {
  std::mt19937_64 rng(8);
  MultiNetHeadConfig cfg;
  cfg.in_channels = 4;
  cfg.in_extent = 2;
  cfg.mlp_hidden = 8;
  cfg.feature_dim = 8;
  auto head = MultiNetHead<double>::init(cfg, rng);
  std::vector<Shape> shapes;
  head.forward(TD({1, 4, 2, 2}, 0.1), ForwardContext{}, &shapes);
  const std::vector<Shape> expected{{1, 1024, 2, 2}, {1, 1024, 2, 2}, {1, 1024, 1, 1},
                                    {1, 768, 1, 1},  {1, 768, 1, 1},  {1, 768, 1, 1}};
  EXPECT_EQ(shapes, expected);
  EXPECT_EQ(head.cascade[0].weight.shape(), (Shape{1024, 4, 1, 1}));
  EXPECT_EQ(head.cascade[1].weight.shape(), (Shape{1024, 1024, 3, 3}));
  EXPECT_EQ(head.cascade[2].weight.shape(), (Shape{768, 1024, 1, 1}));
}

TEST(Head, WrongChannelCountRejected) {
  std::mt19937_64 rng(9);
  MultiNetHeadConfig cfg{8, 4, 12, 10, 16, 14, 8, 0.0};
  auto head = MultiNetHead<double>::init(cfg, rng);
  EXPECT_THROW(head.forward(TD({1, 7, 4, 4}), ForwardContext{}), ShapeError);
}

TEST(MultiNet, ConfigDerivesHeadInput) {
  auto cfg = MultiNetConfig::reduced(64);
  cfg.validate();
  EXPECT_EQ(cfg.head.in_channels, 64u);
  EXPECT_EQ(cfg.head.in_extent, 8u);
  auto full = MultiNetConfig::full(224);
  full.validate();
  EXPECT_EQ(full.head.cascade_wide, 1024u);
  EXPECT_EQ(full.head.cascade_narrow, 768u);
}

TEST(Fusion, ZeroWeightsGiveBias) {
  std::mt19937_64 rng(10);
  ModelSpec spec{"vit+multinet", "micro", 8, 4, 8, 0.0};
  auto model = build_model<double>(spec, rng);
  auto& fused = dynamic_cast<FusedModel<double>&>(*model);
  zero(fused.classifier().weight);
  fused.classifier().bias = TD::uniform({8}, -1, 1, rng);
  auto out = model->forward(TD::uniform({2, 3, 8, 8}, 0, 1, rng), ForwardContext{});
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(out.logits.at({r, c}), fused.classifier().bias.at({c}));
}

TEST(Fusion, TinyVitPlusReducedMultiNetWidth) {
  std::mt19937_64 rng(11);
  ModelSpec spec{"vit+multinet", "tiny", 32, 16, 8, 0.0};
  auto model = build_model<double>(spec, rng);
  EXPECT_EQ(model->feature_dim(), 64u + 1024u);
  EXPECT_EQ(dynamic_cast<FusedModel<double>&>(*model).classifier().weight.shape(), (Shape{8, 1088}));
}

TEST(Fusion, EveryPairingTrainsBothBranches) {
  const auto pairings = evaluation_pairings();
  ASSERT_EQ(pairings.size(), 7u);
  for (const auto& pairing : pairings) {
    std::mt19937_64 rng(12);
    ModelSpec spec{pairing, "micro", 8, 4, 8, 0.0};
    auto model = build_model<double>(spec, rng);
    auto x = TD::uniform({2, 3, 8, 8}, 0, 1, rng);
    auto out = model->forward(x, ForwardContext{});
    ASSERT_EQ(out.logits.shape(), (Shape{2, 8})) << pairing;
    cross_entropy(out.logits, one_hot<double>({1, 5}, 8)).backward();
    const auto params = model->parameters();
    EXPECT_TRUE(any_nonzero_grad(params, "branch_a.")) << pairing;
    EXPECT_TRUE(any_nonzero_grad(params, "branch_b.")) << pairing;
    EXPECT_TRUE(any_nonzero_grad(params, "fusion.")) << pairing;
  }
}

TEST(Pairing, ParsingAndAliases) {
  EXPECT_EQ(canonical_pairing("ViT + MultiNet"), "vit+multinet");
  EXPECT_EQ(canonical_pairing("deit+resnet"), "deit+resnet-style");
  EXPECT_EQ(canonical_pairing("vit+efficientnet"), "vit+efficient-style");
  EXPECT_EQ(parse_pairing("multinet"), (std::vector<std::string>{"multinet"}));
  EXPECT_THROW(parse_pairing("vit+deit+multinet"), ConfigError);
  EXPECT_THROW(parse_pairing("vit+alexnet"), ConfigError);
}

TEST(Pairing, SingleBranchModels) {
  for (const char* name : kBranchNames) {
    std::mt19937_64 rng(13);
    ModelSpec spec{name, "micro", 8, 4, 8, 0.0};
    auto model = build_model<double>(spec, rng);
    EXPECT_EQ(model->forward(TD({1, 3, 8, 8}, 0.5), ForwardContext{}).logits.shape(), (Shape{1, 8})) << name;
  }
}
