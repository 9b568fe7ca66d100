// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "multinet/errors.hpp"
#include "multinet/vit.hpp"
#include "test_util.hpp"

using namespace multinet;
using testutil::values_of;
using TD = Tensor<double>;

namespace {

VitConfig small_vit(bool distill, std::size_t image = 16, std::size_t patch = 4) {
  VitConfig cfg;
  cfg.patch = {image, image, patch, 3, 16};
  cfg.encoder = {2, 4, 16, 32, 0.0};
  cfg.distillation = distill;
  return cfg;
}

void zero(TD& t) { std::fill(t.values().begin(), t.values().end(), 0.0); }

}  // namespace

TEST(PatchEmbed, PatchCounts) {
  EXPECT_EQ((PatchEmbedConfig{224, 224, 16, 3, 64}.num_patches()), 196u);
  EXPECT_EQ((PatchEmbedConfig{16, 16, 16, 3, 64}.num_patches()), 1u);
  EXPECT_EQ((PatchEmbedConfig{64, 32, 8, 3, 64}.num_patches()), 32u);
}

TEST(PatchEmbed, IndivisibleSizeRejected) {
  EXPECT_THROW((PatchEmbedConfig{225, 224, 16, 3, 64}.validate()), ConfigError);
  EXPECT_THROW((PatchEmbedConfig{224, 100, 16, 3, 64}.validate()), ConfigError);
  try {
    PatchEmbedConfig{30, 30, 16, 3, 64}.validate();
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("P=16"), std::string::npos) << msg;
    EXPECT_NE(msg.find("H=30"), std::string::npos) << msg;
  }
}

TEST(PatchEmbed, PatchifyOrder) {
  // One channel 4x4 image with P=2: patch 0 is rows 0-1, columns 0-1.
  PatchEmbedConfig cfg{4, 4, 2, 1, 4};
  std::vector<double> v(16);
  std::iota(v.begin(), v.end(), 0.0);
  auto p = patchify(TD({1, 1, 4, 4}, v), cfg);
  ASSERT_EQ(p.shape(), (Shape{1, 4, 4}));
  EXPECT_EQ(p.at({0, 0, 0}), 0.0);
  EXPECT_EQ(p.at({0, 0, 1}), 1.0);
  EXPECT_EQ(p.at({0, 0, 2}), 4.0);
  EXPECT_EQ(p.at({0, 1, 0}), 2.0);
  EXPECT_EQ(p.at({0, 2, 0}), 8.0);
  EXPECT_EQ(p.at({0, 3, 3}), 15.0);
}

TEST(PatchEmbed, ZeroInputGivesZeroEmbedding) {
  std::mt19937_64 rng(1);
  auto tokens = TokenSet<double>::init(4, 8, false, rng);
  zero(tokens.class_token);
  zero(tokens.positional);
  auto proj = Linear<double>::init(12, 8, rng);
  auto e = embed(TD({2, 4, 12}, 0.0), tokens, proj);
  EXPECT_EQ(e.shape(), (Shape{2, 5, 8}));
  for (double v : e.data()) EXPECT_EQ(v, 0.0);
}

TEST(PatchEmbed, SequenceLengthIsPatchesPlusSpecialTokens) {
  std::mt19937_64 rng(2);
  for (bool distill : {false, true}) {
    auto tokens = TokenSet<double>::init(9, 8, distill, rng);
    auto proj = Linear<double>::init(12, 8, rng);
    EXPECT_EQ(tokens.special_count(), distill ? 2u : 1u);
    EXPECT_EQ(embed(TD({3, 9, 12}, 0.5), tokens, proj).shape(), (Shape{3, 9 + tokens.special_count(), 8}));
  }
}

TEST(Attention, SingleTokenReturnsProjectedValue) {
  std::mt19937_64 rng(3);
  auto mha = MultiHeadAttention<double>::init(8, 2, rng);
  auto x = TD::uniform({1, 1, 8}, -1, 1, rng);
  auto r = mha.forward(x);
  for (double w : r.weights.data()) EXPECT_DOUBLE_EQ(w, 1.0);
  auto expected = mha.out.forward(mha.value.forward(x));
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(r.output.data()[i], expected.data()[i], 1e-12);
}

TEST(Attention, IdenticalTokensAttendUniformly) {
  std::mt19937_64 rng(4);
  auto mha = MultiHeadAttention<double>::init(8, 4, rng);
  auto row = TD::uniform({8}, -1, 1, rng);
  TD x({2, 5, 8});
  for (std::size_t i = 0; i < x.numel(); ++i) x.values()[i] = row.data()[i % 8];
  auto weights = mha.forward(x).weights;
  for (double w : weights.data()) EXPECT_NEAR(w, 0.2, 1e-12);
}

TEST(Attention, RowsSumToOne) {
  std::mt19937_64 rng(5);
  auto mha = MultiHeadAttention<double>::init(8, 2, rng);
  auto r = mha.forward(TD::uniform({2, 6, 8}, -30, 30, rng));
  ASSERT_EQ(r.weights.shape(), (Shape{2, 2, 6, 6}));
  for (std::size_t row = 0; row < r.weights.numel() / 6; ++row) {
    double s = 0;
    for (std::size_t j = 0; j < 6; ++j) s += r.weights.data()[row * 6 + j];
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Attention, HeadsMustDivideWidth) {
  std::mt19937_64 rng(6);
  EXPECT_THROW(MultiHeadAttention<double>::init(10, 4, rng), ConfigError);
  auto cfg = small_vit(false);
  cfg.encoder.heads = 3;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Vit, LogitsShape) {
  std::mt19937_64 rng(7);
  VisionTransformer<double> vit(small_vit(false), rng);
  auto out = vit.forward(TD::uniform({3, 3, 16, 16}, 0, 1, rng), ForwardContext{});
  EXPECT_EQ(out.logits.shape(), (Shape{3, 8}));
  EXPECT_EQ(out.features.shape(), (Shape{3, 16}));
  EXPECT_FALSE(out.distill_logits.defined());
}

TEST(Vit, PatchOrderIrrelevantWithoutPositions) {
  std::mt19937_64 rng(8);
  VisionTransformer<double> vit(small_vit(false), rng);
  zero(vit.tokens().positional);
  auto patches = TD::uniform({1, 16, 48}, 0, 1, rng);
  std::vector<std::size_t> perm(16);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  TD permuted({1, 16, 48});
  for (std::size_t n = 0; n < 16; ++n)
    for (std::size_t j = 0; j < 48; ++j) permuted.at({0, n, j}) = patches.at({0, perm[n], j});
  auto a = vit.forward_patches(patches, ForwardContext{}).logits;
  auto b = vit.forward_patches(permuted, ForwardContext{}).logits;
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-5);
}

TEST(Vit, IdenticalImagesGiveIdenticalRows) {
  std::mt19937_64 rng(9);
  VisionTransformer<double> vit(small_vit(false), rng);
  auto img = TD::uniform({1, 3, 16, 16}, 0, 1, rng);
  auto batch = concat<double>({img, img, img}, 0);
  auto logits = vit.forward(batch, ForwardContext{}).logits;
  for (std::size_t r = 1; r < 3; ++r)
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(logits.at({r, c}), logits.at({0, c}));
}

TEST(Deit, SequenceCarriesTwoSpecialTokens) {
  std::mt19937_64 rng(10);
  VisionTransformer<double> deit(small_vit(true), rng);
  EXPECT_EQ(deit.tokens().positional.shape(), (Shape{1, 16 + 2, 16}));
  std::vector<TD> attention;
  deit.forward_patches(TD::uniform({1, 16, 48}, 0, 1, rng), ForwardContext{}, &attention);
  ASSERT_FALSE(attention.empty());
  EXPECT_EQ(attention[0].shape(), (Shape{1, 4, 18, 18}));
}

TEST(Deit, SymmetricTokensAndHeadsAgree) {
  std::mt19937_64 rng(11);
  VisionTransformer<double> deit(small_vit(true), rng);
  zero(deit.tokens().positional);
  deit.tokens().distillation_token.values() = deit.tokens().class_token.values();
  deit.distill_head().weight.values() = deit.head().weight.values();
  deit.distill_head().bias.values() = deit.head().bias.values();
  auto out = deit.forward(TD::uniform({2, 3, 16, 16}, 0, 1, rng), ForwardContext{});
  for (std::size_t i = 0; i < out.logits.numel(); ++i)
    EXPECT_NEAR(out.logits.data()[i], out.distill_logits.data()[i], 1e-12);
}

TEST(Deit, CombinedPredictionIsDistribution) {
  std::mt19937_64 rng(12);
  VisionTransformer<double> deit(small_vit(true), rng);
  auto out = deit.forward_deit(TD::uniform({4, 3, 16, 16}, 0, 1, rng), ForwardContext{});
  ASSERT_EQ(out.combined.shape(), (Shape{4, 8}));
  auto ps = softmax(out.class_logits), pd = softmax(out.distill_logits);
  for (std::size_t r = 0; r < 4; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < 8; ++c) {
      s += out.combined.at({r, c});
      EXPECT_NEAR(out.combined.at({r, c}), 0.5 * (ps.at({r, c}) + pd.at({r, c})), 1e-12);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Deit, TeacherShapeMismatchRejected) {
  std::mt19937_64 rng(13);
  VisionTransformer<double> deit(small_vit(true), rng);
  auto x = TD::uniform({2, 3, 16, 16}, 0, 1, rng);
  EXPECT_THROW(deit.forward_deit(x, ForwardContext{}, TD({2, 5})), ShapeError);
  EXPECT_NO_THROW(deit.forward_deit(x, ForwardContext{}, TD({2, 8})));
}

TEST(Deit, PlainVitRefusesDistillationForward) {
  std::mt19937_64 rng(14);
  VisionTransformer<double> vit(small_vit(false), rng);
  EXPECT_THROW(vit.forward_deit(TD({1, 3, 16, 16}), ForwardContext{}), ConfigError);
}

TEST(Vit, PresetDimensions) {
  auto tiny = VitConfig::tiny(224, 16);
  EXPECT_EQ(tiny.encoder.embed_dim, 64u);
  EXPECT_EQ(tiny.patch.num_patches(), 196u);
  auto base = VitConfig::base(224, 16);
  EXPECT_EQ(base.encoder.embed_dim, 768u);
  EXPECT_EQ(base.encoder.depth, 12u);
  EXPECT_EQ(base.encoder.heads, 12u);
  EXPECT_NO_THROW(base.validate());
}
