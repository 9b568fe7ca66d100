// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "multinet/gradcheck.hpp"
#include "multinet/layers.hpp"
#include "multinet/losses.hpp"
#include "multinet/models.hpp"
#include "multinet/multinet.hpp"
#include "multinet/ops.hpp"
#include "multinet/vit.hpp"

namespace multinet {

namespace {

using TD = Tensor<double>;

TD uniform(const Shape& shape, std::mt19937_64& rng) { return TD::uniform(shape, -1.0, 1.0, rng); }

/// Σ y ⊙ R for a fixed random R, so every output entry carries a distinct weight.
struct Probe {
  TD weights;
  TD operator()(const TD& y) const { return sum(mul(y, weights)); }
};

Probe probe_for(const Shape& shape, std::mt19937_64& rng) { return {uniform(shape, rng)}; }

std::vector<TD> tensors_of(const ParameterList<double>& params) {
  std::vector<TD> out;
  for (const auto& p : params) out.push_back(p.tensor);
  return out;
}

GradcheckCase make_case(std::string name,
                        std::function<GradcheckResult(std::mt19937_64&, const GradcheckOptions&)> body) {
  return {std::move(name), [body = std::move(body)](const GradcheckOptions& o) {
            std::mt19937_64 rng(o.seed + 17);
            return body(rng, o);
          }};
}

GradcheckResult model_case(const std::string& pairing, const GradcheckOptions& o, std::mt19937_64& rng) {
  ModelSpec spec;
  spec.pairing = pairing;
  spec.preset = "micro";
  spec.image_size = 8;
  spec.patch = 4;
  spec.dropout = 0.0;
  auto model = build_model<double>(spec, rng);
  TD x = uniform({2, 3, 8, 8}, rng);
  TD target = one_hot<double>({1, 6}, 8);
  auto wrt = tensors_of(model->parameters());
  wrt.push_back(x);
  return check_gradients(
      [&] {
        auto out = model->forward(x, ForwardContext{false, nullptr});
        if (out.distill_logits.defined()) {
          return add(cross_entropy(out.logits, target), cross_entropy(out.distill_logits, target));
        }
        return cross_entropy(out.logits, target);
      },
      wrt, o);
}

}  // namespace

std::vector<GradcheckCase> default_gradcheck_cases() {
  std::vector<GradcheckCase> cases;

  cases.push_back(make_case("elementwise add/sub/mul/div (broadcast)", [](auto& rng, const auto& o) {
    TD a = uniform({3, 4}, rng), b = uniform({4}, rng);
    TD c = add(TD::uniform({3, 4}, 1.5, 2.5, rng), 0.0);  // keeps the divisor away from 0
    Probe p = probe_for({3, 4}, rng);
    return check_gradients([&] { return p(div(mul(add(a, b), sub(a, b)), c)); }, {a, b, c}, o);
  }));
  cases.push_back(make_case("exp/log/clamp", [](auto& rng, const auto& o) {
    TD a = uniform({2, 5}, rng), pos = TD::uniform({2, 5}, 0.5, 2.0, rng);
    Probe p = probe_for({2, 5}, rng);
    return check_gradients([&] { return p(add(mul(exp(a), log(pos)), clamp(a, -0.5, 0.5))); }, {a, pos}, o);
  }));
  cases.push_back(make_case("matmul", [](auto& rng, const auto& o) {
    TD a = uniform({3, 4}, rng), b = uniform({4, 2}, rng);
    Probe p = probe_for({3, 2}, rng);
    return check_gradients([&] { return p(matmul(a, b)); }, {a, b}, o);
  }));
  cases.push_back(make_case("bmm (plain and transposed)", [](auto& rng, const auto& o) {
    TD a = uniform({2, 3, 4}, rng), b = uniform({2, 4, 5}, rng), c = uniform({2, 5, 4}, rng);
    Probe p = probe_for({2, 3, 5}, rng);
    return check_gradients([&] { return p(add(bmm(a, b), bmm(a, c, true))); }, {a, b, c}, o);
  }));
  cases.push_back(make_case("reductions sum/mean/sum_axis", [](auto& rng, const auto& o) {
    TD a = uniform({3, 4, 2}, rng);
    Probe p = probe_for({3, 2}, rng);
    return check_gradients([&] { return add(p(sum_axis(a, 1)), mul(mean(a), 3.0)); }, {a}, o);
  }));
  cases.push_back(make_case("reshape/permute/transpose", [](auto& rng, const auto& o) {
    TD a = uniform({2, 3, 4}, rng);
    Probe p = probe_for({4, 2, 3}, rng), q = probe_for({6, 4}, rng);
    return check_gradients([&] { return add(p(permute(a, {2, 0, 1})), q(transpose(reshape(a, {4, 6}), 0, 1))); },
                           {a}, o);
  }));
  cases.push_back(make_case("concat/slice", [](auto& rng, const auto& o) {
    TD a = uniform({2, 3}, rng), b = uniform({2, 5}, rng);
    Probe p = probe_for({2, 8}, rng), q = probe_for({2, 4}, rng);
    return check_gradients(
        [&] {
          auto c = concat<double>({a, b}, 1);
          return add(p(c), q(slice(c, 1, 2, 4)));
        },
        {a, b}, o);
  }));
  cases.push_back(make_case("linear", [](auto& rng, const auto& o) {
    auto layer = Linear<double>::init(5, 3, rng);
    layer.bias = uniform({3}, rng);
    TD x = uniform({2, 4, 5}, rng);
    Probe p = probe_for({2, 4, 3}, rng);
    return check_gradients([&] { return p(layer.forward(x)); }, {x, layer.weight, layer.bias}, o);
  }));
  for (auto [name, stride, pad] : {std::tuple{"conv2d 3x3 same", 1, Padding::kSame},
                                   std::tuple{"conv2d 3x3 valid", 1, Padding::kValid},
                                   std::tuple{"conv2d 3x3 stride 2 same", 2, Padding::kSame}}) {
    cases.push_back(make_case(name, [stride = stride, pad = pad](auto& rng, const auto& o) {
      auto conv = Conv2d<double>::init(2, 3, 3, static_cast<std::size_t>(stride), pad, rng);
      conv.bias = uniform({3}, rng);
      TD x = uniform({2, 2, 5, 5}, rng);
      const std::size_t h = conv_output_extent(5, 3, static_cast<std::size_t>(stride), pad);
      Probe p = probe_for({2, 3, h, h}, rng);
      return check_gradients([&] { return p(conv.forward(x)); }, {x, conv.weight, conv.bias}, o);
    }));
  }
  cases.push_back(make_case("maxpool2d 2x2", [](auto& rng, const auto& o) {
    TD x = uniform({1, 2, 6, 6}, rng);
    Probe p = probe_for({1, 2, 3, 3}, rng);
    return check_gradients([&] { return p(maxpool2d(x, 2, 2)); }, {x}, o);
  }));
  cases.push_back(make_case("adaptive_avg_pool2d", [](auto& rng, const auto& o) {
    TD x = uniform({1, 2, 5, 7}, rng);
    Probe p = probe_for({1, 2, 3, 2}, rng);
    return check_gradients([&] { return p(adaptive_avg_pool2d(x, 3, 2)); }, {x}, o);
  }));
  cases.push_back(make_case("relu/gelu", [](auto& rng, const auto& o) {
    TD x = uniform({4, 6}, rng);
    Probe p = probe_for({4, 6}, rng), q = probe_for({4, 6}, rng);
    return check_gradients([&] { return add(p(relu(x)), q(gelu(x))); }, {x}, o);
  }));
  cases.push_back(make_case("softmax/log_softmax", [](auto& rng, const auto& o) {
    TD x = uniform({3, 8}, rng);
    Probe p = probe_for({3, 8}, rng), q = probe_for({3, 8}, rng);
    return check_gradients([&] { return add(p(softmax(x)), q(log_softmax(x))); }, {x}, o);
  }));
  cases.push_back(make_case("layer_norm", [](auto& rng, const auto& o) {
    auto ln = LayerNorm<double>::init(6);
    ln.gamma = uniform({6}, rng);
    ln.beta = uniform({6}, rng);
    TD x = uniform({3, 6}, rng);
    Probe p = probe_for({3, 6}, rng);
    return check_gradients([&] { return p(ln.forward(x)); }, {x, ln.gamma, ln.beta}, o);
  }));
  cases.push_back(make_case("dropout (fixed mask)", [](auto& rng, const auto& o) {
    TD x = uniform({4, 8}, rng);
    Probe p = probe_for({4, 8}, rng);
    return check_gradients(
        [&] {
          std::mt19937_64 mask_rng(99);
          return p(dropout(x, 0.3, ForwardContext{true, &mask_rng}));
        },
        {x}, o);
  }));
  cases.push_back(make_case("patchify + embed", [](auto& rng, const auto& o) {
    PatchEmbedConfig cfg{8, 8, 4, 3, 6};
    auto proj = Linear<double>::init(cfg.patch_dim(), 6, rng);
    auto tokens = TokenSet<double>::init(cfg.num_patches(), 6, true, rng);
    TD x = uniform({2, 3, 8, 8}, rng);
    Probe p = probe_for({2, 6, 6}, rng);
    return check_gradients([&] { return p(embed(patchify(x, cfg), tokens, proj)); },
                           {x, proj.weight, proj.bias, tokens.class_token, tokens.distillation_token,
                            tokens.positional},
                           o);
  }));
  cases.push_back(make_case("multi-head attention", [](auto& rng, const auto& o) {
    auto mha = MultiHeadAttention<double>::init(8, 2, rng);
    TD x = uniform({2, 5, 8}, rng);
    Probe p = probe_for({2, 5, 8}, rng);
    ParameterList<double> params;
    mha.collect("", params);
    auto wrt = tensors_of(params);
    wrt.push_back(x);
    return check_gradients([&] { return p(mha.forward(x).output); }, wrt, o);
  }));
  cases.push_back(make_case("encoder block", [](auto& rng, const auto& o) {
    auto block = EncoderBlock<double>::init({1, 2, 8, 16, 0.0}, rng);
    TD x = uniform({2, 5, 8}, rng);
    Probe p = probe_for({2, 5, 8}, rng);
    ParameterList<double> params;
    block.collect("", params);
    auto wrt = tensors_of(params);
    wrt.push_back(x);
    return check_gradients([&] { return p(block.forward(x, ForwardContext{})); }, wrt, o);
  }));
  cases.push_back(make_case("residual block (projection shortcut)", [](auto& rng, const auto& o) {
    auto block = ResidualBlock<double>::init(2, 3, 2, rng);
    TD x = uniform({1, 2, 6, 6}, rng);
    Probe p = probe_for({1, 3, 3, 3}, rng);
    ParameterList<double> params;
    block.collect("", params);
    auto wrt = tensors_of(params);
    wrt.push_back(x);
    return check_gradients([&] { return p(block.forward(x)); }, wrt, o);
  }));
  cases.push_back(make_case("inverted bottleneck", [](auto& rng, const auto& o) {
    auto block = InvertedBottleneck<double>::init(2, 2, 1, 2, rng);
    TD x = uniform({1, 2, 5, 5}, rng);
    Probe p = probe_for({1, 2, 5, 5}, rng);
    ParameterList<double> params;
    block.collect("", params);
    auto wrt = tensors_of(params);
    wrt.push_back(x);
    return check_gradients([&] { return p(block.forward(x)); }, wrt, o);
  }));
  cases.push_back(make_case("merge_parallel", [](auto& rng, const auto& o) {
    TD a = uniform({2, 2, 3, 3}, rng), b = uniform({2, 3, 3, 3}, rng);
    Probe p = probe_for({2, 5, 3, 3}, rng);
    return check_gradients([&] { return p(merge_parallel(a, b)); }, {a, b}, o);
  }));
  for (auto form : {LossForm::kCategorical, LossForm::kEq3Literal}) {
    cases.push_back(make_case("cross_entropy " + to_string(form), [form](auto& rng, const auto& o) {
      TD z = uniform({3, 8}, rng);
      TD y = one_hot<double>({0, 5, 7}, 8);
      return check_gradients([&] { return cross_entropy(z, y, form); }, {z}, o);
    }));
  }
  for (auto mode : {DistillMode::kHard, DistillMode::kSoft}) {
    cases.push_back(make_case("distillation " + to_string(mode), [mode](auto& rng, const auto& o) {
      TD zc = uniform({3, 8}, rng), zd = uniform({3, 8}, rng), teacher = uniform({3, 8}, rng);
      TD y = one_hot<double>({2, 4, 1}, 8);
      return check_gradients([&] { return distillation_loss(zc, zd, y, teacher, mode, 2.0).total; }, {zc, zd}, o);
    }));
  }
  cases.push_back(make_case("ViT-tiny model (D=8, depth 1, 2 heads, 8x8, P=4)",
                            [](auto& rng, const auto& o) { return model_case("vit", o, rng); }));
  cases.push_back(make_case("DeiT-tiny model (D=8, depth 1, 2 heads, 8x8, P=4)",
                            [](auto& rng, const auto& o) { return model_case("deit", o, rng); }));
  cases.push_back(make_case("MultiNet-reduced model (micro widths, 8x8)",
                            [](auto& rng, const auto& o) { return model_case("multinet", o, rng); }));
  cases.push_back(make_case("ViT+MultiNet fused model",
                            [](auto& rng, const auto& o) { return model_case("vit+multinet", o, rng); }));
  return cases;
}

}  // namespace multinet
