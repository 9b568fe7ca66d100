// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "multinet/layers.hpp"
#include "multinet/model.hpp"

namespace multinet {

enum class BackboneKind { kVgg, kResidual, kEfficient };

std::string to_string(BackboneKind kind);

/// Stage widths and blocks per stage. Every stage halves the spatial extent
/// (rounding up for strided stages, down for pooled ones).
struct BackboneConfig {
  BackboneKind kind = BackboneKind::kVgg;
  std::vector<std::size_t> widths{16, 32, 32};
  std::size_t depth = 1;
  std::size_t in_channels = 3;
  std::size_t expansion = 2;  // inverted-bottleneck expansion, efficient-style only

  void validate() const;
  std::size_t out_channels() const { return widths.back(); }
  std::size_t output_extent(std::size_t input) const;
};

/// out = relu(F(x) + shortcut(x)), F = conv3×3(stride) → relu → conv3×3.
template <typename T>
struct ResidualBlock {
  Conv2d<T> conv1, conv2;
  Conv2d<T> projection;  // 1×1 shortcut, undefined for identity shortcuts

  static ResidualBlock init(std::size_t in_ch, std::size_t out_ch, std::size_t stride, std::mt19937_64& rng);
  Tensor<T> forward(const Tensor<T>& x) const;
  Tensor<T> shortcut(const Tensor<T>& x) const;
  void collect(const std::string& prefix, ParameterList<T>& out) const;
};

/// expand 1×1 → relu → conv3×3(stride) → relu → project 1×1, plus identity when shapes allow.
template <typename T>
struct InvertedBottleneck {
  Conv2d<T> expand, spatial, project;
  bool residual = false;

  static InvertedBottleneck init(std::size_t in_ch, std::size_t out_ch, std::size_t stride,
                                 std::size_t expansion, std::mt19937_64& rng);
  Tensor<T> forward(const Tensor<T>& x) const;
  void collect(const std::string& prefix, ParameterList<T>& out) const;
};

template <typename T>
class Backbone {
 public:
  Backbone(const BackboneConfig& cfg, std::mt19937_64& rng);

  Tensor<T> forward(const Tensor<T>& x) const;
  void collect(const std::string& prefix, ParameterList<T>& out) const;
  const BackboneConfig& config() const { return cfg_; }

  std::vector<Conv2d<T>>& vgg_convs() { return convs_; }
  std::vector<ResidualBlock<T>>& residual_blocks() { return residual_; }

 private:
  BackboneConfig cfg_;
  Conv2d<T> stem_;
  std::vector<Conv2d<T>> convs_;               // vgg-style
  std::vector<ResidualBlock<T>> residual_;     // residual-style
  std::vector<InvertedBottleneck<T>> inverted_;  // efficient-style
};

/// Channel-axis concatenation of two feature maps with equal spatial extent.
template <typename T>
Tensor<T> merge_parallel(const Tensor<T>& a, const Tensor<T>& b);

struct MultiNetHeadConfig {
  std::size_t in_channels = 64;
  std::size_t in_extent = 8;          // spatial side of the merged feature map
  std::size_t cascade_wide = 1024;    // 1×1 then 3×3 convolutions before pooling
  std::size_t cascade_narrow = 768;   // 1×1, 3×3, 3×3 convolutions after pooling
  std::size_t mlp_hidden = 1024;
  std::size_t feature_dim = 1024;     // penultimate width
  std::size_t num_classes = 8;
  double dropout = 0.1;

  void validate() const;
  std::size_t flattened() const { return cascade_narrow * (in_extent / 2) * (in_extent / 2); }
};

template <typename T>
struct HeadOutput {
  Tensor<T> features;  // (B, feature_dim)
  Tensor<T> logits;    // (B, K)
};

/// Convolution cascade (1024: 1×1, 3×3 → 2×2 max-pool → 768: 1×1, 3×3, 3×3)
/// followed by two dropout-wrapped linear layers, a 1024-unit layer and the
/// K-way output layer.
template <typename T>
struct MultiNetHead {
  std::vector<Conv2d<T>> cascade;  // five convolutions, ReLU after each
  Linear<T> fc1, fc2, fc_features, out;
  Dropout drop{0.0};
  MultiNetHeadConfig cfg;

  static MultiNetHead init(const MultiNetHeadConfig& cfg, std::mt19937_64& rng);
  HeadOutput<T> forward(const Tensor<T>& f, const ForwardContext& ctx,
                        std::vector<Shape>* cascade_shapes = nullptr) const;
  void collect(const std::string& prefix, ParameterList<T>& out) const;
};

struct MultiNetConfig {
  std::size_t image_size = 224;
  BackboneConfig vgg{BackboneKind::kVgg, {16, 32, 32}, 1, 3, 2};
  BackboneConfig residual{BackboneKind::kResidual, {16, 32, 32}, 1, 3, 2};
  MultiNetHeadConfig head;

  /// Desk-scale widths: backbones {16,32,32}, cascade 64/48, MLP 256, features 1024.
  static MultiNetConfig reduced(std::size_t image_size);
  /// Full-width cascade (1024/768) with VGG/ResNet-like stage widths.
  static MultiNetConfig full(std::size_t image_size);
  /// Checks the backbones and derives the head's input channels and extent.
  void validate();
};

/// Parallel vgg-style and residual-style backbones merged channel-wise, then the
/// convolution cascade and MLP head.
template <typename T>
class MultiNet final : public Classifier<T> {
 public:
  MultiNet(const MultiNetConfig& cfg, std::mt19937_64& rng);

  ModelOutput<T> forward(const Tensor<T>& x, const ForwardContext& ctx) const override;
  void collect(const std::string& prefix, ParameterList<T>& out) const override;
  std::size_t feature_dim() const override { return cfg_.head.feature_dim; }
  std::size_t num_classes() const override { return cfg_.head.num_classes; }
  std::string kind() const override { return "multinet"; }

  const MultiNetConfig& config() const { return cfg_; }
  MultiNetHead<T>& head() { return head_; }
  Backbone<T>& vgg() { return vgg_; }
  Backbone<T>& residual() { return residual_; }

 private:
  MultiNetConfig cfg_;
  Backbone<T> vgg_;
  Backbone<T> residual_;
  MultiNetHead<T> head_;
};

struct BackboneClassifierConfig {
  std::size_t image_size = 224;
  BackboneConfig backbone;
  std::size_t num_classes = 8;
};

/// Single backbone, global average pooling (the features) and a linear classifier.
template <typename T>
class BackboneClassifier final : public Classifier<T> {
 public:
  BackboneClassifier(const BackboneClassifierConfig& cfg, std::mt19937_64& rng);

  ModelOutput<T> forward(const Tensor<T>& x, const ForwardContext& ctx) const override;
  void collect(const std::string& prefix, ParameterList<T>& out) const override;
  std::size_t feature_dim() const override { return cfg_.backbone.out_channels(); }
  std::size_t num_classes() const override { return cfg_.num_classes; }
  std::string kind() const override;

 private:
  BackboneClassifierConfig cfg_;
  Backbone<T> backbone_;
  Linear<T> classifier_;
};

/// logits = Linear(concat(features_a, features_b)).
template <typename T>
class FusedModel final : public Classifier<T> {
 public:
  FusedModel(std::unique_ptr<Classifier<T>> a, std::unique_ptr<Classifier<T>> b, std::size_t num_classes,
             std::mt19937_64& rng);

  ModelOutput<T> forward(const Tensor<T>& x, const ForwardContext& ctx) const override;
  void collect(const std::string& prefix, ParameterList<T>& out) const override;
  std::size_t feature_dim() const override { return a_->feature_dim() + b_->feature_dim(); }
  std::size_t num_classes() const override { return num_classes_; }
  std::string kind() const override { return a_->kind() + "+" + b_->kind(); }

  const Classifier<T>& branch_a() const { return *a_; }
  const Classifier<T>& branch_b() const { return *b_; }
  Linear<T>& classifier() { return classifier_; }

 private:
  std::unique_ptr<Classifier<T>> a_;
  std::unique_ptr<Classifier<T>> b_;
  std::size_t num_classes_;
  Linear<T> classifier_;
};

}  // namespace multinet
