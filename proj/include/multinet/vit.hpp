// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "multinet/layers.hpp"
#include "multinet/model.hpp"

namespace multinet {

struct PatchEmbedConfig {
  std::size_t image_h = 224;
  std::size_t image_w = 224;
  std::size_t patch = 16;
  std::size_t channels = 3;
  std::size_t embed_dim = 64;

  /// N = H·W / P².
  std::size_t num_patches() const { return (image_h / patch) * (image_w / patch); }
  std::size_t patch_dim() const { return patch * patch * channels; }
  /// Throws ConfigError naming H, W and P when P does not divide both sides.
  void validate() const;
};

struct EncoderConfig {
  std::size_t depth = 4;
  std::size_t heads = 4;
  std::size_t embed_dim = 64;
  std::size_t mlp_dim = 128;
  double dropout = 0.1;

  void validate() const;
};

struct VitConfig {
  PatchEmbedConfig patch;
  EncoderConfig encoder;
  std::size_t num_classes = 8;
  bool distillation = false;

  /// D=64, depth 4, 4 heads, MLP width 128.
  static VitConfig tiny(std::size_t image_size = 224, std::size_t patch = 16);
  /// ViT-B/16 dimensions.
  static VitConfig base(std::size_t image_size = 224, std::size_t patch = 16);
  void validate() const;
};

/// (B,C,H,W) → (B,N,P²·C). Patches in raster order; each patch flattened as
/// (channel, row, column).
template <typename T>
Tensor<T> patchify(const Tensor<T>& x, const PatchEmbedConfig& cfg);

template <typename T>
struct TokenSet {
  Tensor<T> class_token;         // (1,1,D)
  Tensor<T> distillation_token;  // (1,1,D), undefined without distillation
  Tensor<T> positional;          // (1, N+T, D)

  static TokenSet init(std::size_t num_patches, std::size_t dim, bool distillation, std::mt19937_64& rng);
  std::size_t special_count() const { return distillation_token.defined() ? 2 : 1; }
  void collect(const std::string& prefix, ParameterList<T>& out) const;
};

/// Linear projection of each patch, special tokens prepended, positional
/// embeddings added: (B,N,P²·C) → (B,N+T,D).
template <typename T>
Tensor<T> embed(const Tensor<T>& patches, const TokenSet<T>& tokens, const Linear<T>& proj);

template <typename T>
struct AttentionResult {
  Tensor<T> output;   // (B,S,D)
  Tensor<T> weights;  // (B,heads,S,S), rows sum to 1
};

template <typename T>
struct MultiHeadAttention {
  Linear<T> query, key, value, out;
  std::size_t heads = 1;

  static MultiHeadAttention init(std::size_t dim, std::size_t heads, std::mt19937_64& rng);
  /// Per head softmax(Q·Kᵀ/√(D/heads))·V, heads concatenated and projected.
  AttentionResult<T> forward(const Tensor<T>& x) const;
  void collect(const std::string& prefix, ParameterList<T>& out) const;
};

/// Pre-norm transformer block: x + MHA(LN(x)), then x + MLP(LN(x)).
template <typename T>
struct EncoderBlock {
  LayerNorm<T> norm1;
  MultiHeadAttention<T> attention;
  LayerNorm<T> norm2;
  Linear<T> fc1, fc2;
  Dropout drop{0.0};

  static EncoderBlock init(const EncoderConfig& cfg, std::mt19937_64& rng);
  Tensor<T> forward(const Tensor<T>& x, const ForwardContext& ctx,
                    std::vector<Tensor<T>>* attention_out = nullptr) const;
  void collect(const std::string& prefix, ParameterList<T>& out) const;
};

template <typename T>
struct DeitOutput {
  Tensor<T> class_logits;
  Tensor<T> distill_logits;
  Tensor<T> combined;  // mean of both head softmaxes
  Tensor<T> teacher_logits;
};

/// ViT classifier; with `distillation` set it is the DeiT variant carrying a
/// second token and head.
template <typename T>
class VisionTransformer final : public Classifier<T> {
 public:
  VisionTransformer(const VitConfig& cfg, std::mt19937_64& rng);

  ModelOutput<T> forward(const Tensor<T>& x, const ForwardContext& ctx) const override;
  /// Same as forward() but starting from already patchified input.
  ModelOutput<T> forward_patches(const Tensor<T>& patches, const ForwardContext& ctx,
                                 std::vector<Tensor<T>>* attention_out = nullptr) const;
  /// Both heads plus the eval-time combination; `teacher_logits` must be (B,K).
  DeitOutput<T> forward_deit(const Tensor<T>& x, const ForwardContext& ctx,
                             const std::optional<Tensor<T>>& teacher_logits = std::nullopt) const;

  void collect(const std::string& prefix, ParameterList<T>& out) const override;
  std::size_t feature_dim() const override { return cfg_.encoder.embed_dim; }
  std::size_t num_classes() const override { return cfg_.num_classes; }
  std::string kind() const override { return cfg_.distillation ? "deit" : "vit"; }

  const VitConfig& config() const { return cfg_; }
  TokenSet<T>& tokens() { return tokens_; }
  Linear<T>& head() { return head_; }
  Linear<T>& distill_head() { return distill_head_; }

 private:
  VitConfig cfg_;
  Linear<T> projection_;
  TokenSet<T> tokens_;
  std::vector<EncoderBlock<T>> blocks_;
  LayerNorm<T> norm_;
  Linear<T> head_;
  Linear<T> distill_head_;
  Dropout drop_{0.0};
};

}  // namespace multinet
