// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include "multinet/multinet.hpp"

#include <algorithm>

#include "multinet/errors.hpp"
#include "multinet/ops.hpp"

namespace multinet {

std::string to_string(BackboneKind kind) {
  switch (kind) {
    case BackboneKind::kVgg: return "vgg-style";
    case BackboneKind::kResidual: return "resnet-style";
    case BackboneKind::kEfficient: return "efficient-style";
  }
  return "unknown";
}

void BackboneConfig::validate() const {
  if (widths.empty()) throw ConfigError(to_string(kind) + " backbone needs at least one stage");
  if (std::find(widths.begin(), widths.end(), std::size_t{0}) != widths.end()) {
    throw ConfigError(to_string(kind) + " backbone stage widths must be positive");
  }
  if (depth == 0 || in_channels == 0) throw ConfigError(to_string(kind) + " backbone needs depth and input channels");
  if (kind == BackboneKind::kEfficient && expansion == 0) throw ConfigError("expansion factor must be positive");
}

std::size_t BackboneConfig::output_extent(std::size_t input) const {
  std::size_t extent = input;
  for (std::size_t s = 0; s < widths.size(); ++s) {
    if (kind == BackboneKind::kVgg) {
      if (extent < 2) {
        throw ConfigError("input extent " + std::to_string(input) + " is too small for " +
                          std::to_string(widths.size()) + " vgg-style stages");
      }
      extent /= 2;
    } else {
      extent = (extent + 1) / 2;
    }
  }
  return extent;
}

// ---------------------------------------------------------------------------

template <typename T>
ResidualBlock<T> ResidualBlock<T>::init(std::size_t in_ch, std::size_t out_ch, std::size_t stride,
                                        std::mt19937_64& rng) {
  ResidualBlock block;
  block.conv1 = Conv2d<T>::init(in_ch, out_ch, 3, stride, Padding::kSame, rng);
  block.conv2 = Conv2d<T>::init(out_ch, out_ch, 3, 1, Padding::kSame, rng);
  if (stride != 1 || in_ch != out_ch) {
    block.projection = Conv2d<T>::init(in_ch, out_ch, 1, stride, Padding::kSame, rng);
  }
  return block;
}

template <typename T>
Tensor<T> ResidualBlock<T>::shortcut(const Tensor<T>& x) const {
  return projection.weight.defined() ? projection.forward(x) : x;
}

template <typename T>
Tensor<T> ResidualBlock<T>::forward(const Tensor<T>& x) const {
  auto residual = conv2.forward(relu(conv1.forward(x)));
  return relu(add(residual, shortcut(x)));
}

template <typename T>
void ResidualBlock<T>::collect(const std::string& prefix, ParameterList<T>& out) const {
  conv1.collect(join_name(prefix, "conv1"), out);
  conv2.collect(join_name(prefix, "conv2"), out);
  if (projection.weight.defined()) projection.collect(join_name(prefix, "shortcut"), out);
}

template <typename T>
InvertedBottleneck<T> InvertedBottleneck<T>::init(std::size_t in_ch, std::size_t out_ch, std::size_t stride,
                                                  std::size_t expansion, std::mt19937_64& rng) {
  InvertedBottleneck block;
  const std::size_t wide = in_ch * expansion;
  block.expand = Conv2d<T>::init(in_ch, wide, 1, 1, Padding::kSame, rng);
  block.spatial = Conv2d<T>::init(wide, wide, 3, stride, Padding::kSame, rng);
  block.project = Conv2d<T>::init(wide, out_ch, 1, 1, Padding::kSame, rng);
  block.residual = stride == 1 && in_ch == out_ch;
  return block;
}

template <typename T>
Tensor<T> InvertedBottleneck<T>::forward(const Tensor<T>& x) const {
  auto h = project.forward(relu(spatial.forward(relu(expand.forward(x)))));
  return residual ? add(h, x) : h;
}

template <typename T>
void InvertedBottleneck<T>::collect(const std::string& prefix, ParameterList<T>& out) const {
  expand.collect(join_name(prefix, "expand"), out);
  spatial.collect(join_name(prefix, "spatial"), out);
  project.collect(join_name(prefix, "project"), out);
}

template <typename T>
Backbone<T>::Backbone(const BackboneConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
  cfg_.validate();
  std::size_t in_ch = cfg_.in_channels;
  if (cfg_.kind == BackboneKind::kVgg) {
    for (std::size_t w : cfg_.widths) {
      for (std::size_t d = 0; d < cfg_.depth; ++d) {
        convs_.push_back(Conv2d<T>::init(in_ch, w, 3, 1, Padding::kSame, rng));
        in_ch = w;
      }
    }
    return;
  }
  stem_ = Conv2d<T>::init(in_ch, cfg_.widths.front(), 3, 1, Padding::kSame, rng);
  in_ch = cfg_.widths.front();
  for (std::size_t w : cfg_.widths) {
    for (std::size_t d = 0; d < cfg_.depth; ++d) {
      const std::size_t stride = d == 0 ? 2 : 1;
      if (cfg_.kind == BackboneKind::kResidual) {
        residual_.push_back(ResidualBlock<T>::init(in_ch, w, stride, rng));
      } else {
        inverted_.push_back(InvertedBottleneck<T>::init(in_ch, w, stride, cfg_.expansion, rng));
      }
      in_ch = w;
    }
  }
}

template <typename T>
Tensor<T> Backbone<T>::forward(const Tensor<T>& x) const {
  if (x.dim() != 4 || x.extent(1) != cfg_.in_channels) {
    throw ShapeError(to_string(cfg_.kind) + " backbone expects (B," + std::to_string(cfg_.in_channels) +
                     ",H,W) input, got " + shape_str(x.shape()));
  }
  Tensor<T> h = x;
  switch (cfg_.kind) {
    case BackboneKind::kVgg:
      for (std::size_t i = 0; i < convs_.size(); ++i) {
        h = relu(convs_[i].forward(h));
        if ((i + 1) % cfg_.depth == 0) h = maxpool2d(h, 2, 2);
      }
      break;
    case BackboneKind::kResidual:
      h = relu(stem_.forward(h));
      for (const auto& block : residual_) h = block.forward(h);
      break;
    case BackboneKind::kEfficient:
      h = relu(stem_.forward(h));
      for (const auto& block : inverted_) h = relu(block.forward(h));
      break;
  }
  return h;
}

template <typename T>
void Backbone<T>::collect(const std::string& prefix, ParameterList<T>& out) const {
  if (stem_.weight.defined()) stem_.collect(join_name(prefix, "stem"), out);
  for (std::size_t i = 0; i < convs_.size(); ++i) convs_[i].collect(join_name(prefix, "conv" + std::to_string(i)), out);
  for (std::size_t i = 0; i < residual_.size(); ++i) {
    residual_[i].collect(join_name(prefix, "block" + std::to_string(i)), out);
  }
  for (std::size_t i = 0; i < inverted_.size(); ++i) {
    inverted_[i].collect(join_name(prefix, "block" + std::to_string(i)), out);
  }
}

template <typename T>
Tensor<T> merge_parallel(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.dim() != 4 || b.dim() != 4 || a.extent(0) != b.extent(0) || a.extent(2) != b.extent(2) ||
      a.extent(3) != b.extent(3)) {
    throw ShapeError("merge_parallel: feature maps " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                     " differ in batch or spatial extent");
  }
  return concat<T>({a, b}, 1);
}

// ---------------------------------------------------------------------------

void MultiNetHeadConfig::validate() const {
  if (in_extent < 2) {
    throw ConfigError("the merged feature map is " + std::to_string(in_extent) + "x" + std::to_string(in_extent) +
                      "; the cascade's 2x2 max-pool needs at least 2x2");
  }
  if (in_channels == 0 || cascade_wide == 0 || cascade_narrow == 0 || mlp_hidden == 0 || feature_dim == 0) {
    throw ConfigError("MultiNet head widths must be positive");
  }
  if (num_classes < 2) throw ConfigError("a classifier needs at least 2 classes");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("head dropout must lie in [0, 1)");
}

template <typename T>
MultiNetHead<T> MultiNetHead<T>::init(const MultiNetHeadConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  MultiNetHead head;
  head.cfg = cfg;
  const std::size_t wide = cfg.cascade_wide, narrow = cfg.cascade_narrow;
  head.cascade.push_back(Conv2d<T>::init(cfg.in_channels, wide, 1, 1, Padding::kSame, rng));
  head.cascade.push_back(Conv2d<T>::init(wide, wide, 3, 1, Padding::kSame, rng));
  head.cascade.push_back(Conv2d<T>::init(wide, narrow, 1, 1, Padding::kSame, rng));
  head.cascade.push_back(Conv2d<T>::init(narrow, narrow, 3, 1, Padding::kSame, rng));
  head.cascade.push_back(Conv2d<T>::init(narrow, narrow, 3, 1, Padding::kSame, rng));
  head.fc1 = Linear<T>::init(cfg.flattened(), cfg.mlp_hidden, rng);
  head.fc2 = Linear<T>::init(cfg.mlp_hidden, cfg.mlp_hidden, rng);
  head.fc_features = Linear<T>::init(cfg.mlp_hidden, cfg.feature_dim, rng);
  head.out = Linear<T>::init(cfg.feature_dim, cfg.num_classes, rng);
  head.drop = Dropout(cfg.dropout);
  return head;
}

template <typename T>
HeadOutput<T> MultiNetHead<T>::forward(const Tensor<T>& f, const ForwardContext& ctx,
                                       std::vector<Shape>* cascade_shapes) const {
  if (f.dim() != 4 || f.extent(1) != cfg.in_channels) {
    throw ShapeError("MultiNet head expects (B," + std::to_string(cfg.in_channels) + ",H,W), got " +
                     shape_str(f.shape()));
  }
  if (f.extent(2) < 2 || f.extent(3) < 2) {
    throw ShapeError("MultiNet head input " + shape_str(f.shape()) + " is too small for the 2x2 max-pool");
  }
  if (f.extent(2) != cfg.in_extent || f.extent(3) != cfg.in_extent) {
    throw ShapeError("MultiNet head was built for " + std::to_string(cfg.in_extent) + "x" +
                     std::to_string(cfg.in_extent) + " maps, got " + shape_str(f.shape()));
  }
  Tensor<T> h = f;
  for (std::size_t i = 0; i < cascade.size(); ++i) {
    h = relu(cascade[i].forward(h));
    if (cascade_shapes) cascade_shapes->push_back(h.shape());
    if (i == 1) {
      h = maxpool2d(h, 2, 2);
      if (cascade_shapes) cascade_shapes->push_back(h.shape());
    }
  }
  const std::size_t b = h.extent(0);
  auto flat = reshape(h, {b, h.numel() / b});
  auto z = drop.forward(relu(fc1.forward(flat)), ctx);
  z = drop.forward(relu(fc2.forward(z)), ctx);
  HeadOutput<T> out;
  out.features = relu(fc_features.forward(z));
  out.logits = this->out.forward(out.features);
  return out;
}

template <typename T>
void MultiNetHead<T>::collect(const std::string& prefix, ParameterList<T>& list) const {
  for (std::size_t i = 0; i < cascade.size(); ++i) {
    cascade[i].collect(join_name(prefix, "cascade" + std::to_string(i)), list);
  }
  fc1.collect(join_name(prefix, "fc1"), list);
  fc2.collect(join_name(prefix, "fc2"), list);
  fc_features.collect(join_name(prefix, "fc_features"), list);
  out.collect(join_name(prefix, "out"), list);
}

MultiNetConfig MultiNetConfig::reduced(std::size_t image_size) {
  MultiNetConfig cfg;
  cfg.image_size = image_size;
  cfg.vgg = {BackboneKind::kVgg, {16, 32, 32}, 1, 3, 2};
  cfg.residual = {BackboneKind::kResidual, {16, 32, 32}, 1, 3, 2};
  cfg.head.cascade_wide = 64;
  cfg.head.cascade_narrow = 48;
  cfg.head.mlp_hidden = 256;
  cfg.head.feature_dim = 1024;
  cfg.validate();
  return cfg;
}

MultiNetConfig MultiNetConfig::full(std::size_t image_size) {
  MultiNetConfig cfg;
  cfg.image_size = image_size;
  cfg.vgg = {BackboneKind::kVgg, {64, 128, 256, 512}, 2, 3, 2};
  cfg.residual = {BackboneKind::kResidual, {64, 128, 256, 512}, 2, 3, 2};
  cfg.head.cascade_wide = 1024;
  cfg.head.cascade_narrow = 768;
  cfg.head.mlp_hidden = 1024;
  cfg.head.feature_dim = 1024;
  cfg.validate();
  return cfg;
}

void MultiNetConfig::validate() {
  vgg.validate();
  residual.validate();
  if (vgg.kind != BackboneKind::kVgg || residual.kind != BackboneKind::kResidual) {
    throw ConfigError("MultiNet pairs a vgg-style and a resnet-style backbone");
  }
  head.in_channels = vgg.out_channels() + residual.out_channels();
  head.in_extent = std::min(vgg.output_extent(image_size), residual.output_extent(image_size));
  head.validate();
}

template <typename T>
MultiNet<T>::MultiNet(const MultiNetConfig& cfg, std::mt19937_64& rng)
    : cfg_(cfg), vgg_(cfg.vgg, rng), residual_(cfg.residual, rng) {
  cfg_.validate();
  head_ = MultiNetHead<T>::init(cfg_.head, rng);
}

template <typename T>
ModelOutput<T> MultiNet<T>::forward(const Tensor<T>& x, const ForwardContext& ctx) const {
  if (x.dim() != 4 || x.extent(2) != cfg_.image_size || x.extent(3) != cfg_.image_size) {
    throw ShapeError("MultiNet was built for " + std::to_string(cfg_.image_size) + "x" +
                     std::to_string(cfg_.image_size) + " input, got " + shape_str(x.shape()));
  }
  auto fa = vgg_.forward(x);
  auto fb = residual_.forward(x);
  const std::size_t extent = cfg_.head.in_extent;
  if (fa.extent(2) != extent || fa.extent(3) != extent) fa = adaptive_avg_pool2d(fa, extent, extent);
  if (fb.extent(2) != extent || fb.extent(3) != extent) fb = adaptive_avg_pool2d(fb, extent, extent);
  auto head_out = head_.forward(merge_parallel(fa, fb), ctx);
  return {head_out.features, head_out.logits, {}};
}

template <typename T>
void MultiNet<T>::collect(const std::string& prefix, ParameterList<T>& out) const {
  vgg_.collect(join_name(prefix, "vgg"), out);
  residual_.collect(join_name(prefix, "resnet"), out);
  head_.collect(join_name(prefix, "head"), out);
}

// ---------------------------------------------------------------------------

template <typename T>
BackboneClassifier<T>::BackboneClassifier(const BackboneClassifierConfig& cfg, std::mt19937_64& rng)
    : cfg_(cfg), backbone_(cfg.backbone, rng) {
  cfg_.backbone.output_extent(cfg_.image_size);
  if (cfg_.num_classes < 2) throw ConfigError("a classifier needs at least 2 classes");
  classifier_ = Linear<T>::init(cfg_.backbone.out_channels(), cfg_.num_classes, rng);
}

template <typename T>
ModelOutput<T> BackboneClassifier<T>::forward(const Tensor<T>& x, const ForwardContext&) const {
  if (x.dim() != 4 || x.extent(2) != cfg_.image_size || x.extent(3) != cfg_.image_size) {
    throw ShapeError(kind() + " was built for " + std::to_string(cfg_.image_size) + "x" +
                     std::to_string(cfg_.image_size) + " input, got " + shape_str(x.shape()));
  }
  auto maps = backbone_.forward(x);
  auto pooled = adaptive_avg_pool2d(maps, 1, 1);
  auto features = reshape(pooled, {maps.extent(0), maps.extent(1)});
  return {features, classifier_.forward(features), {}};
}

template <typename T>
void BackboneClassifier<T>::collect(const std::string& prefix, ParameterList<T>& out) const {
  backbone_.collect(join_name(prefix, "backbone"), out);
  classifier_.collect(join_name(prefix, "classifier"), out);
}

template <typename T>
std::string BackboneClassifier<T>::kind() const {
  return to_string(cfg_.backbone.kind);
}

// ---------------------------------------------------------------------------

template <typename T>
FusedModel<T>::FusedModel(std::unique_ptr<Classifier<T>> a, std::unique_ptr<Classifier<T>> b,
                          std::size_t num_classes, std::mt19937_64& rng)
    : a_(std::move(a)), b_(std::move(b)), num_classes_(num_classes) {
  if (!a_ || !b_) throw ConfigError("a fused model needs two branches");
  classifier_ = Linear<T>::init(a_->feature_dim() + b_->feature_dim(), num_classes, rng);
}

template <typename T>
ModelOutput<T> FusedModel<T>::forward(const Tensor<T>& x, const ForwardContext& ctx) const {
  auto oa = a_->forward(x, ctx);
  auto ob = b_->forward(x, ctx);
  auto joined = concat<T>({oa.features, ob.features}, 1);
  return {joined, classifier_.forward(joined), {}};
}

template <typename T>
void FusedModel<T>::collect(const std::string& prefix, ParameterList<T>& out) const {
  a_->collect(join_name(prefix, "branch_a"), out);
  b_->collect(join_name(prefix, "branch_b"), out);
  classifier_.collect(join_name(prefix, "fusion"), out);
}

#define MULTINET_INSTANTIATE_CNN(T)                                         \
  template struct ResidualBlock<T>;                                         \
  template struct InvertedBottleneck<T>;                                    \
  template class Backbone<T>;                                               \
  template Tensor<T> merge_parallel(const Tensor<T>&, const Tensor<T>&);    \
  template struct MultiNetHead<T>;                                          \
  template class MultiNet<T>;                                               \
  template class BackboneClassifier<T>;                                     \
  template class FusedModel<T>;

MULTINET_INSTANTIATE_CNN(float)
MULTINET_INSTANTIATE_CNN(double)

}  // namespace multinet
