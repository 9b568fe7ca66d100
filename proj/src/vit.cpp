// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include "multinet/vit.hpp"

#include <cmath>

#include "multinet/errors.hpp"
#include "multinet/ops.hpp"

namespace multinet {

void PatchEmbedConfig::validate() const {
  if (patch == 0 || image_h == 0 || image_w == 0 || image_h % patch != 0 || image_w % patch != 0) {
    throw ConfigError("patch size P=" + std::to_string(patch) + " must divide H=" + std::to_string(image_h) +
                      " and W=" + std::to_string(image_w));
  }
  if (channels == 0 || embed_dim == 0) throw ConfigError("patch embedding needs channels and embed_dim > 0");
}

void EncoderConfig::validate() const {
  if (heads == 0 || embed_dim % heads != 0) {
    throw ConfigError("embed_dim " + std::to_string(embed_dim) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("encoder dropout must lie in [0, 1)");
}

VitConfig VitConfig::tiny(std::size_t image_size, std::size_t patch) {
  VitConfig cfg;
  cfg.patch = {image_size, image_size, patch, 3, 64};
  cfg.encoder = {4, 4, 64, 128, 0.1};
  return cfg;
}

VitConfig VitConfig::base(std::size_t image_size, std::size_t patch) {
  VitConfig cfg;
  cfg.patch = {image_size, image_size, patch, 3, 768};
  cfg.encoder = {12, 12, 768, 3072, 0.1};
  return cfg;
}

void VitConfig::validate() const {
  patch.validate();
  encoder.validate();
  if (patch.embed_dim != encoder.embed_dim) {
    throw ConfigError("patch embedding width " + std::to_string(patch.embed_dim) +
                      " differs from encoder width " + std::to_string(encoder.embed_dim));
  }
  if (num_classes < 2) throw ConfigError("a classifier needs at least 2 classes");
}

template <typename T>
Tensor<T> patchify(const Tensor<T>& x, const PatchEmbedConfig& cfg) {
  if (x.dim() != 4) throw ShapeError("patchify expects (B,C,H,W), got " + shape_str(x.shape()));
  const std::size_t b = x.extent(0), c = x.extent(1), h = x.extent(2), w = x.extent(3);
  const std::size_t p = cfg.patch;
  if (p == 0 || h % p != 0 || w % p != 0) {
    throw ConfigError("image H=" + std::to_string(h) + ", W=" + std::to_string(w) +
                      " is not divisible by patch size P=" + std::to_string(p));
  }
  if (h != cfg.image_h || w != cfg.image_w || c != cfg.channels) {
    throw ShapeError("patchify: input " + shape_str(x.shape()) + " does not match configured " +
                     std::to_string(cfg.channels) + "x" + std::to_string(cfg.image_h) + "x" +
                     std::to_string(cfg.image_w));
  }
  const std::size_t gh = h / p, gw = w / p;
  auto grid = reshape(x, {b, c, gh, p, gw, p});
  auto ordered = permute(grid, {0, 2, 4, 1, 3, 5});
  return reshape(ordered, {b, gh * gw, c * p * p});
}

template <typename T>
TokenSet<T> TokenSet<T>::init(std::size_t num_patches, std::size_t dim, bool distillation,
                              std::mt19937_64& rng) {
  TokenSet set;
  set.class_token = Tensor<T>::normal({1, 1, dim}, T(0), T(0.02), rng).set_requires_grad(true);
  if (distillation) {
    set.distillation_token = Tensor<T>::normal({1, 1, dim}, T(0), T(0.02), rng).set_requires_grad(true);
  }
  const std::size_t seq = num_patches + (distillation ? 2 : 1);
  set.positional = Tensor<T>::normal({1, seq, dim}, T(0), T(0.02), rng).set_requires_grad(true);
  return set;
}

template <typename T>
void TokenSet<T>::collect(const std::string& prefix, ParameterList<T>& out) const {
  out.push_back({join_name(prefix, "class_token"), class_token});
  if (distillation_token.defined()) out.push_back({join_name(prefix, "distillation_token"), distillation_token});
  out.push_back({join_name(prefix, "positional"), positional});
}

template <typename T>
Tensor<T> embed(const Tensor<T>& patches, const TokenSet<T>& tokens, const Linear<T>& proj) {
  if (patches.dim() != 3 || patches.extent(2) != proj.in_features()) {
    throw ShapeError("embed: patches " + shape_str(patches.shape()) + " do not match projection " +
                     shape_str(proj.weight.shape()));
  }
  const std::size_t b = patches.extent(0), n = patches.extent(1), d = proj.out_features();
  const std::size_t seq = n + tokens.special_count();
  if (tokens.class_token.shape() != Shape{1, 1, d} || tokens.positional.shape() != Shape{1, seq, d}) {
    throw ShapeError("embed: tokens (class " + shape_str(tokens.class_token.shape()) + ", positional " +
                     shape_str(tokens.positional.shape()) + ") do not fit a sequence of " +
                     std::to_string(seq) + "x" + std::to_string(d));
  }
  std::vector<Tensor<T>> parts{repeat_batch(tokens.class_token, b)};
  if (tokens.distillation_token.defined()) parts.push_back(repeat_batch(tokens.distillation_token, b));
  parts.push_back(proj.forward(patches));
  return add(concat(parts, 1), tokens.positional);
}

template <typename T>
MultiHeadAttention<T> MultiHeadAttention<T>::init(std::size_t dim, std::size_t heads, std::mt19937_64& rng) {
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("attention width " + std::to_string(dim) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
  MultiHeadAttention mha;
  mha.query = Linear<T>::init(dim, dim, rng);
  mha.key = Linear<T>::init(dim, dim, rng);
  mha.value = Linear<T>::init(dim, dim, rng);
  mha.out = Linear<T>::init(dim, dim, rng);
  mha.heads = heads;
  return mha;
}

template <typename T>
AttentionResult<T> MultiHeadAttention<T>::forward(const Tensor<T>& x) const {
  if (x.dim() != 3) throw ShapeError("attention expects (B,S,D), got " + shape_str(x.shape()));
  const std::size_t b = x.extent(0), s = x.extent(1), d = x.extent(2);
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("attention width " + std::to_string(d) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
  const std::size_t dh = d / heads;
  auto split = [&](const Tensor<T>& t) {
    return reshape(permute(reshape(t, {b, s, heads, dh}), {0, 2, 1, 3}), {b * heads, s, dh});
  };
  auto q = split(query.forward(x));
  auto k = split(key.forward(x));
  auto v = split(value.forward(x));
  auto scores = mul(bmm(q, k, true), T(1) / std::sqrt(static_cast<T>(dh)));
  auto weights = softmax(scores);
  auto context = bmm(weights, v);
  auto merged = reshape(permute(reshape(context, {b, heads, s, dh}), {0, 2, 1, 3}), {b, s, d});
  return {out.forward(merged), reshape(weights, {b, heads, s, s})};
}

template <typename T>
void MultiHeadAttention<T>::collect(const std::string& prefix, ParameterList<T>& out_list) const {
  query.collect(join_name(prefix, "query"), out_list);
  key.collect(join_name(prefix, "key"), out_list);
  value.collect(join_name(prefix, "value"), out_list);
  out.collect(join_name(prefix, "out"), out_list);
}

template <typename T>
EncoderBlock<T> EncoderBlock<T>::init(const EncoderConfig& cfg, std::mt19937_64& rng) {
  EncoderBlock block;
  block.norm1 = LayerNorm<T>::init(cfg.embed_dim);
  block.attention = MultiHeadAttention<T>::init(cfg.embed_dim, cfg.heads, rng);
  block.norm2 = LayerNorm<T>::init(cfg.embed_dim);
  block.fc1 = Linear<T>::init(cfg.embed_dim, cfg.mlp_dim, rng);
  block.fc2 = Linear<T>::init(cfg.mlp_dim, cfg.embed_dim, rng);
  block.drop = Dropout(cfg.dropout);
  return block;
}

template <typename T>
Tensor<T> EncoderBlock<T>::forward(const Tensor<T>& x, const ForwardContext& ctx,
                                   std::vector<Tensor<T>>* attention_out) const {
  auto attn = attention.forward(norm1.forward(x));
  if (attention_out) attention_out->push_back(attn.weights);
  auto h = add(x, drop.forward(attn.output, ctx));
  auto mlp = fc2.forward(drop.forward(gelu(fc1.forward(norm2.forward(h))), ctx));
  return add(h, drop.forward(mlp, ctx));
}

template <typename T>
void EncoderBlock<T>::collect(const std::string& prefix, ParameterList<T>& out) const {
  norm1.collect(join_name(prefix, "norm1"), out);
  attention.collect(join_name(prefix, "attn"), out);
  norm2.collect(join_name(prefix, "norm2"), out);
  fc1.collect(join_name(prefix, "mlp.fc1"), out);
  fc2.collect(join_name(prefix, "mlp.fc2"), out);
}

template <typename T>
VisionTransformer<T>::VisionTransformer(const VitConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t d = cfg_.encoder.embed_dim;
  projection_ = Linear<T>::init(cfg_.patch.patch_dim(), d, rng);
  tokens_ = TokenSet<T>::init(cfg_.patch.num_patches(), d, cfg_.distillation, rng);
  for (std::size_t i = 0; i < cfg_.encoder.depth; ++i) blocks_.push_back(EncoderBlock<T>::init(cfg_.encoder, rng));
  norm_ = LayerNorm<T>::init(d);
  head_ = Linear<T>::init(d, cfg_.num_classes, rng);
  if (cfg_.distillation) distill_head_ = Linear<T>::init(d, cfg_.num_classes, rng);
  drop_ = Dropout(cfg_.encoder.dropout);
}

template <typename T>
ModelOutput<T> VisionTransformer<T>::forward(const Tensor<T>& x, const ForwardContext& ctx) const {
  return forward_patches(patchify(x, cfg_.patch), ctx);
}

template <typename T>
ModelOutput<T> VisionTransformer<T>::forward_patches(const Tensor<T>& patches, const ForwardContext& ctx,
                                                     std::vector<Tensor<T>>* attention_out) const {
  auto h = drop_.forward(embed(patches, tokens_, projection_), ctx);
  for (const auto& block : blocks_) h = block.forward(h, ctx, attention_out);
  h = norm_.forward(h);
  const std::size_t b = h.extent(0), d = h.extent(2);
  auto cls = reshape(slice(h, 1, 0, 1), {b, d});
  ModelOutput<T> out;
  out.logits = head_.forward(cls);
  if (cfg_.distillation) {
    auto dist = reshape(slice(h, 1, 1, 1), {b, d});
    out.distill_logits = distill_head_.forward(dist);
    out.features = mul(add(cls, dist), T(0.5));
  } else {
    out.features = cls;
  }
  return out;
}

template <typename T>
DeitOutput<T> VisionTransformer<T>::forward_deit(const Tensor<T>& x, const ForwardContext& ctx,
                                                 const std::optional<Tensor<T>>& teacher_logits) const {
  if (!cfg_.distillation) throw ConfigError("forward_deit needs a model built with a distillation token");
  auto out = forward(x, ctx);
  DeitOutput<T> result;
  result.class_logits = out.logits;
  result.distill_logits = out.distill_logits;
  result.combined = predict_proba(out);
  if (teacher_logits) {
    if (teacher_logits->shape() != out.logits.shape()) {
      throw ShapeError("teacher logits " + shape_str(teacher_logits->shape()) + " do not match student logits " +
                       shape_str(out.logits.shape()));
    }
    result.teacher_logits = *teacher_logits;
  }
  return result;
}

template <typename T>
void VisionTransformer<T>::collect(const std::string& prefix, ParameterList<T>& out) const {
  projection_.collect(join_name(prefix, "patch_embed"), out);
  tokens_.collect(prefix, out);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i].collect(join_name(prefix, "blocks." + std::to_string(i)), out);
  }
  norm_.collect(join_name(prefix, "norm"), out);
  head_.collect(join_name(prefix, "head"), out);
  if (cfg_.distillation) distill_head_.collect(join_name(prefix, "distill_head"), out);
}

template <typename T>
Tensor<T> predict_proba(const ModelOutput<T>& out) {
  if (!out.distill_logits.defined()) return softmax(out.logits);
  return mul(add(softmax(out.logits), softmax(out.distill_logits)), T(0.5));
}

#define MULTINET_INSTANTIATE_VIT(T)                                                         \
  template Tensor<T> patchify(const Tensor<T>&, const PatchEmbedConfig&);                   \
  template Tensor<T> embed(const Tensor<T>&, const TokenSet<T>&, const Linear<T>&);         \
  template Tensor<T> predict_proba(const ModelOutput<T>&);                                  \
  template struct TokenSet<T>;                                                              \
  template struct MultiHeadAttention<T>;                                                    \
  template struct EncoderBlock<T>;                                                          \
  template class VisionTransformer<T>;

MULTINET_INSTANTIATE_VIT(float)
MULTINET_INSTANTIATE_VIT(double)

}  // namespace multinet
